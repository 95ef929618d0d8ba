// Copyright 2026 The pfmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sources.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>

#include "errors.hpp"

namespace pfmc {

namespace {

// Unbiased one-shot for a single matrix element given a drawn context.
struct ElementShot {
  enum class Kind { Stencil, Mixture } kind = Kind::Stencil;
  // Stencil: middles at +h, -h, +h/2, -h/2 of exp(J).
  std::vector<Middle> middles;
  double h = kDefaultSourceStep;
  // Mixture: pick term j with probability |c_j| / C.
  std::vector<cd> unit_coef;  // C * c_j / |c_j|
  std::vector<double> cumulative;
  double bound = 1.0;  // one-shot magnitude in units of the unitary-kernel one-shot

  cd eval(const PairingEvaluator& ev, PairingEvaluator::Context& c, SampleRng& rng, cd* residual) const {
    if (kind == Kind::Stencil) {
      cd zp = ev.evaluate(c, middles[0]), zm = ev.evaluate(c, middles[1]);
      cd zp2 = ev.evaluate(c, middles[2]), zm2 = ev.evaluate(c, middles[3]);
      cd d1 = (zp - zm) / (2.0 * h), d2 = (zp2 - zm2) / h;
      cd r = (4.0 * d2 - d1) / 3.0;
      if (residual) *residual = r - d2;
      return r;
    }
    double u = rng.uniform();
    std::size_t j = 0;
    while (j + 1 < cumulative.size() && u >= cumulative[j]) ++j;
    if (residual) *residual = 0.0;
    return unit_coef[j] * ev.evaluate(c, middles[j]);
  }
};

ElementShot mixture(const std::vector<cd>& coef, const std::vector<Middle>& mids) {
  ElementShot s;
  s.kind = ElementShot::Kind::Mixture;
  double total = 0.0;
  for (const auto& c : coef) total += std::abs(c);
  double acc = 0.0;
  for (std::size_t j = 0; j < coef.size(); ++j) {
    if (coef[j] == cd(0.0)) continue;
    acc += std::abs(coef[j]);
    s.cumulative.push_back(acc / total);
    s.unit_coef.push_back(total * coef[j] / std::abs(coef[j]));
    s.middles.push_back(mids[j]);
  }
  if (s.middles.empty()) {
    s.cumulative.push_back(1.0);
    s.unit_coef.push_back(0.0);
    s.middles.push_back(Middle::identity());
  }
  s.bound = total;
  return s;
}

ElementShot one_body_stencil(int m, int p, int q, double h) {
  ElementShot s;
  s.h = h;
  for (double t : {h, -h, h / 2, -h / 2}) {
    if (p == q) {
      VectorXcd d = VectorXcd::Ones(m);
      d(p) = std::exp(t);
      s.middles.push_back(Middle::diagonal(d));
    } else {
      MatrixXcd u = MatrixXcd::Zero(m, 1), vt = MatrixXcd::Zero(1, m);
      u(p, 0) = t;
      vt(0, q) = 1.0;
      s.middles.push_back(Middle::low_rank(u, vt));
    }
  }
  // Rank-one sources make each sample affine in exp(t) - 1, so the stencil is a
  // fixed multiple of the exact derivative.
  if (p == q) {
    double a = std::sinh(h) / h, b = std::sinh(h / 2) / (h / 2);
    s.bound = std::abs(4.0 * b - a) / 3.0;
  } else {
    s.bound = 1.0;
  }
  return s;
}

// c^dag_x c_y as a combination of reflections exp(i pi n_P) and the identity,
// with total absolute weight 1. Each reflection is I + u v^T with rank one.
struct Reflections {
  std::vector<cd> coef;
  std::vector<MatrixXcd> u, vt;  // empty u marks the identity
};

Reflections one_body_reflections(int m, int x, int y) {
  Reflections r;
  if (x == y) {
    r.coef = {0.5, -0.5};
    r.u.push_back(MatrixXcd());
    r.vt.push_back(MatrixXcd());
    MatrixXcd u = MatrixXcd::Zero(m, 1), vt = MatrixXcd::Zero(1, m);
    u(x, 0) = -2.0;
    vt(0, x) = 1.0;
    r.u.push_back(u);
    r.vt.push_back(vt);
    return r;
  }
  // E_xy = 1/2 sum_k i^k P_k with P_k the projector on (e_x + i^k e_y)/sqrt2,
  // and n_P = (1 - Pi_P)/2 where the constants cancel.
  const cd ik[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
  for (int k = 0; k < 4; ++k) {
    VectorXcd v = VectorXcd::Zero(m);
    v(x) = 1.0 / std::sqrt(2.0);
    v(y) = ik[k] / std::sqrt(2.0);
    r.coef.push_back(-0.25 * ik[k]);
    r.u.push_back(-2.0 * v);
    r.vt.push_back(v.adjoint());
  }
  return r;
}

Middle reflection_product(int m, const MatrixXcd& ua, const MatrixXcd& va, const MatrixXcd& ub, const MatrixXcd& vb) {
  // (I + ua va)(I + ub vb) = I + [ua, ub + ua (va ub)] [va; vb].
  const bool ida = ua.size() == 0, idb = ub.size() == 0;
  if (ida && idb) return Middle::identity();
  if (ida) return Middle::low_rank(ub, vb);
  if (idb) return Middle::low_rank(ua, va);
  MatrixXcd u(m, 2), vt(2, m);
  u.col(0) = ua.col(0);
  u.col(1) = ub.col(0) + ua.col(0) * (va * ub)(0, 0);
  vt.row(0) = va.row(0);
  vt.row(1) = vb.row(0);
  return Middle::low_rank(u, vt);
}

ElementShot two_body_reflections(int m, int p, int q, int r, int s) {
  // c^dag_p c^dag_q c_s c_r = (c^dag_p c_r)(c^dag_q c_s) - delta_rq c^dag_p c_s.
  Reflections a = one_body_reflections(m, p, r), b = one_body_reflections(m, q, s);
  std::vector<cd> coef;
  std::vector<Middle> mids;
  for (std::size_t i = 0; i < a.coef.size(); ++i)
    for (std::size_t j = 0; j < b.coef.size(); ++j) {
      coef.push_back(a.coef[i] * b.coef[j]);
      mids.push_back(reflection_product(m, a.u[i], a.vt[i], b.u[j], b.vt[j]));
    }
  if (r == q) {
    Reflections c = one_body_reflections(m, p, s);
    for (std::size_t i = 0; i < c.coef.size(); ++i) {
      coef.push_back(-c.coef[i]);
      mids.push_back(c.u[i].size() ? Middle::low_rank(c.u[i], c.vt[i]) : Middle::identity());
    }
  }
  return mixture(coef, mids);
}

void check_indices(const std::vector<int>& idx, int m) {
  if (idx.size() != 2 && idx.size() != 4) throw ValidationError("RDM indices must be (p,q) or (p,q,r,s)");
  for (int i : idx)
    if (i < 0 || i >= m) throw ValidationError("RDM index " + std::to_string(i) + " out of range");
}

// Sum of element one-shots with common random numbers per sample.
Estimate run_elements(const PairingEvaluator& ev, std::vector<cd> coef, std::vector<ElementShot> shots,
                      cd constant_coef, double eps, double delta, const SamplingOptions& opt, bool real_target) {
  if (ev.particle_mismatch()) {
    Estimate e;
    e.delta = delta;
    e.aggregation = "exact";
    return e;
  }
  double bound = std::abs(constant_coef);
  for (std::size_t j = 0; j < coef.size(); ++j) bound += std::abs(coef[j]) * shots[j].bound;
  auto make = [&ev, &coef, &shots, constant_coef](bool residual_only) {
    return [&ev, &coef, &shots, constant_coef, residual_only] {
      auto ctx = std::make_shared<PairingEvaluator::Context>();
      return std::function<cd(SampleRng&)>([&ev, &coef, &shots, constant_coef, residual_only, ctx](SampleRng& rng) {
        ev.draw(rng, *ctx);
        cd total = constant_coef == cd(0.0) || residual_only ? cd(0.0) : constant_coef * ev.evaluate(*ctx, Middle::identity());
        for (std::size_t j = 0; j < shots.size(); ++j) {
          cd res;
          cd v = shots[j].eval(ev, *ctx, rng, &res);
          total += coef[j] * (residual_only ? res : v);
        }
        return total;
      });
    };
  };
  Sampler s;
  s.make_worker = make(false);
  s.pointwise_bound = bound * ev.pointwise_unit();
  s.moment_bound = bound * ev.moment_unit();
  s.real_target = real_target;
  Estimate e = run_sampler(s, eps, delta, opt);
  bool has_stencil = false;
  for (const auto& sh : shots) has_stencil |= sh.kind == ElementShot::Kind::Stencil;
  if (has_stencil) {
    Sampler r = s;
    r.make_worker = make(true);
    r.real_target = false;
    SamplingOptions o = opt;
    o.fixed_samples = std::min<std::int64_t>(4096, e.samples);
    o.seed = derive_seed(opt.seed, 0xB1A5);
    e.bias = std::abs(run_sampler(r, eps, delta, o).value);
  }
  e.extras["gamma"] = ev.gamma();
  e.extras["op_norm_power"] = ev.moment_unit();
  return e;
}

bool is_hermitian(const MatrixXcd& k) {
  return k.rows() == k.cols() && (k - k.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff());
}

// Derivative stencils of theta -> Z(exp(i theta K)), scaled to <O(K)> or <O(K)^2>.
struct HermitianSource {
  std::vector<Middle> middles;  // theta = +h, -h, +h/2, -h/2
};

HermitianSource hermitian_source(const MatrixXcd& k, double h) {
  HermitianSource s;
  for (double t : {h, -h, h / 2, -h / 2}) s.middles.push_back(Middle::full(expm_hermitian(k, cd(0.0, t))));
  return s;
}

}  // namespace

Estimate transition_rdm_element(const GaussianMap& left, const GaussianMap& right, const ApsgState& phi,
                                const ApsgState& psi, const std::vector<int>& indices, double eps, double delta,
                                const SamplingOptions& opt, double step) {
  const int m = psi.num_modes();
  check_indices(indices, m);
  PairingEvaluator ev(Propagation::fixed(left, right), phi, psi);
  ElementShot shot = indices.size() == 2
                         ? one_body_stencil(m, indices[0], indices[1], step)
                         : two_body_reflections(m, indices[0], indices[1], indices[2], indices[3]);
  bool real = ev.hermitian() && indices.size() == 2 && indices[0] == indices[1];
  Estimate e = run_elements(ev, {cd(1.0)}, {shot}, 0.0, eps, delta, opt, real);
  e.extras["step"] = indices.size() == 2 ? step : 0.0;
  return e;
}

void SumOfSquares::validate(int num_modes) const {
  if (h1.size() && (h1.rows() != num_modes || !is_hermitian(h1)))
    throw ValidationError("hamiltonian: h1 must be a Hermitian M x M matrix");
  if (lambdas.size() != factors.size()) throw ValidationError("hamiltonian: one coefficient per factor");
  for (const auto& l : factors)
    if (l.rows() != num_modes || !is_hermitian(l))
      throw ValidationError("hamiltonian: factors must be Hermitian M x M matrices");
}

double source_norm_bound(const MatrixXcd& k, int n_pairs) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(k);
  const auto& ev = es.eigenvalues();
  auto f = [&](double c) {
    double s = 2.0 * n_pairs * std::abs(c);
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += std::abs(ev(i) - c);
    return s;
  };
  double best = f(0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::min(best, f(ev(i)));
  return best;
}

Estimate hamiltonian_transition_element(const GaussianMap& left, const GaussianMap& right, const ApsgState& phi,
                                        const ApsgState& psi, const SumOfSquares& h, double eps, double delta,
                                        const SamplingOptions& opt, double step) {
  const int m = psi.num_modes();
  h.validate(m);
  PairingEvaluator ev(Propagation::fixed(left, right), phi, psi);
  if (ev.particle_mismatch()) {
    Estimate e;
    e.delta = delta;
    e.aggregation = "exact";
    return e;
  }
  const int n = psi.num_blocks();
  struct Term {
    HermitianSource src;
    bool second;
    double coef;
  };
  std::vector<Term> terms;
  double bound = std::abs(h.e0);
  if (h.h1.size()) {
    terms.push_back({hermitian_source(h.h1, step), false, 1.0});
    double b = source_norm_bound(h.h1, n);
    bound += b * (1.0 + (step * b) * (step * b));
  }
  for (std::size_t l = 0; l < h.factors.size(); ++l) {
    terms.push_back({hermitian_source(h.factors[l], step), true, 0.5 * h.lambdas[l]});
    double b = source_norm_bound(h.factors[l], n);
    bound += std::abs(0.5 * h.lambdas[l]) * b * b * (1.0 + (step * b) * (step * b));
  }
  const double e0 = h.e0;
  auto make = [&ev, &terms, e0, step](bool residual_only) {
    return [&ev, &terms, e0, step, residual_only] {
      auto ctx = std::make_shared<PairingEvaluator::Context>();
      return std::function<cd(SampleRng&)>([&ev, &terms, e0, step, residual_only, ctx](SampleRng& rng) {
        ev.draw(rng, *ctx);
        cd z0 = ev.evaluate(*ctx, Middle::identity());
        cd total = residual_only ? cd(0.0) : e0 * z0;
        const cd i(0.0, 1.0);
        for (const auto& t : terms) {
          cd zp = ev.evaluate(*ctx, t.src.middles[0]), zm = ev.evaluate(*ctx, t.src.middles[1]);
          cd zp2 = ev.evaluate(*ctx, t.src.middles[2]), zm2 = ev.evaluate(*ctx, t.src.middles[3]);
          cd d, d2;
          if (!t.second) {
            d = (zp - zm) / (2.0 * step) / i;
            d2 = (zp2 - zm2) / step / i;
          } else {
            d = -(zp - 2.0 * z0 + zm) / (step * step);
            d2 = -(zp2 - 2.0 * z0 + zm2) / (step * step / 4.0);
          }
          cd r = (4.0 * d2 - d) / 3.0;
          total += t.coef * (residual_only ? r - d2 : r);
        }
        return total;
      });
    };
  };
  Sampler s;
  s.make_worker = make(false);
  s.pointwise_bound = bound * ev.pointwise_unit();
  s.moment_bound = bound * ev.moment_unit();
  s.real_target = ev.hermitian();
  Estimate e = run_sampler(s, eps, delta, opt);
  if (!terms.empty()) {
    Sampler r = s;
    r.make_worker = make(true);
    r.real_target = false;
    SamplingOptions o = opt;
    o.fixed_samples = std::min<std::int64_t>(4096, e.samples);
    o.seed = derive_seed(opt.seed, 0xB1A5);
    e.bias = std::abs(run_sampler(r, eps, delta, o).value);
  }
  e.extras["gamma"] = ev.gamma();
  e.extras["op_norm_power"] = ev.moment_unit();
  e.extras["step"] = step;
  return e;
}

Estimate orbital_gradient(const GaussianMap& u, const ApsgState& psi, const SumOfSquares& h, int p, int q, double eps,
                          double delta, const SamplingOptions& opt, double step) {
  const int m = psi.num_modes();
  h.validate(m);
  if (p < 0 || p >= m || q < 0 || q >= m) throw ValidationError("orbital_gradient: index out of range");
  MatrixXcd k = MatrixXcd::Zero(m, m);
  k(p, q) += 1.0;
  k(q, p) -= 1.0;
  // [O(A), O(B)] = O([A,B]) and <O(A) O(B)> = sum (AB)_ad g_ad + sum A_ab B_cd Gamma_{ac,bd}.
  MatrixXcd c1 = MatrixXcd::Zero(m, m);
  if (h.h1.size()) c1 += h.h1 * k - k * h.h1;
  std::map<std::array<int, 4>, cd> two;
  for (std::size_t l = 0; l < h.factors.size(); ++l) {
    const MatrixXcd& lf = h.factors[l];
    MatrixXcd c = lf * k - k * lf;
    const double w = 0.5 * h.lambdas[l];
    c1 += w * (lf * c + c * lf);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int cc = 0; cc < m; ++cc)
          for (int d = 0; d < m; ++d) {
            cd v = w * (lf(a, b) * c(cc, d) + c(a, b) * lf(cc, d));
            if (std::abs(v) > 1e-14) two[{a, cc, b, d}] += v;
          }
  }
  std::vector<cd> coef;
  std::vector<ElementShot> shots;
  for (int a = 0; a < m; ++a)
    for (int d = 0; d < m; ++d)
      if (std::abs(c1(a, d)) > 1e-14) {
        coef.push_back(c1(a, d));
        shots.push_back(one_body_stencil(m, a, d, step));
      }
  for (const auto& [key, v] : two)
    if (std::abs(v) > 1e-14) {
      coef.push_back(v);
      shots.push_back(two_body_reflections(m, key[0], key[1], key[2], key[3]));
    }
  // Fold every element into one importance-sampled mixture over elements.
  double total = 0.0;
  for (std::size_t j = 0; j < coef.size(); ++j) total += std::abs(coef[j]) * shots[j].bound;
  PairingEvaluator ev(Propagation::fixed(u, u), psi, psi);
  if (total == 0.0) {
    Estimate e;
    e.delta = delta;
    e.aggregation = "exact";
    return e;
  }
  // A two-level draw: element j with probability |c_j| B_j / total.
  auto cumulative = std::make_shared<std::vector<double>>();
  double acc = 0.0;
  for (std::size_t j = 0; j < coef.size(); ++j) {
    acc += std::abs(coef[j]) * shots[j].bound;
    cumulative->push_back(acc / total);
  }
  Sampler s;
  s.make_worker = [&ev, &coef, &shots, cumulative, total] {
    auto ctx = std::make_shared<PairingEvaluator::Context>();
    return [&ev, &coef, &shots, cumulative, total, ctx](SampleRng& rng) {
      double u = rng.uniform();
      std::size_t j = 0;
      while (j + 1 < cumulative->size() && u >= (*cumulative)[j]) ++j;
      ev.draw(rng, *ctx);
      cd v = shots[j].eval(ev, *ctx, rng, nullptr);
      return total * coef[j] / (std::abs(coef[j]) * shots[j].bound) * v;
    };
  };
  s.pointwise_bound = total * ev.pointwise_unit();
  s.moment_bound = total * ev.moment_unit();
  s.real_target = true;
  Estimate e = run_sampler(s, eps, delta, opt);
  e.extras["terms"] = static_cast<double>(coef.size());
  return e;
}

}  // namespace pfmc
