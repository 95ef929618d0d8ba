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

#include "overlap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"
#include "pfaffian.hpp"

namespace pfmc {

Propagation Propagation::fixed(const GaussianMap& left, const GaussianMap& right) {
  if (left.num_modes() != right.num_modes()) throw ValidationError("left and right maps differ in size");
  Propagation p;
  p.num_modes_ = left.num_modes();
  p.left_adj_ = left.matrix().adjoint();
  p.right_ = right.matrix();
  p.norm_bound_ = left.op_norm() * right.op_norm();
  p.unitary_ = left.is_unitary() && right.is_unitary();
  p.symmetric_ = left.matrix() == right.matrix();
  return p;
}

Propagation Propagation::hubbard_hs(const LatticeSpec& lat, double J, double W, double dt, int n_slices) {
  Propagation p;
  p.random_ = true;
  p.symmetric_ = true;
  p.lat_ = lat;
  p.num_modes_ = lat.num_modes();
  p.hs_ = hs_factors(lat, J, W, dt, n_slices);
  p.n_slices_ = n_slices;
  p.dt_ = dt;
  p.norm_bound_ = p.hs_.norm_bound * p.hs_.norm_bound;
  p.unitary_ = std::abs(p.hs_.lambda.real()) == 0.0;
  return p;
}

void Propagation::draw_path(SampleRng& rng, MatrixXcd& out) const {
  const int l = lat_.num_sites();
  out = MatrixXcd::Identity(num_modes_, num_modes_);
  VectorXcd v(num_modes_);
  const cd up = std::exp(-hs_.lambda), dn = std::exp(hs_.lambda);
  for (int s = 0; s < n_slices_; ++s) {
    for (int i = 0; i < l; ++i) {
      bool plus = rng.bit();
      v(i) = plus ? up : dn;
      v(l + i) = plus ? dn : up;
    }
    out = hs_.u_half * (v.asDiagonal() * (hs_.u_half * out));
  }
}

PairingEvaluator::PairingEvaluator(Propagation prop, const ApsgState& phi, const ApsgState& psi)
    : prop_(std::move(prop)) {
  m_ = psi.num_modes();
  if (phi.num_modes() != m_ || prop_.num_modes() != m_) throw ValidationError("bra, ket and maps must share the mode count");
  n_ = psi.num_blocks();
  mismatch_ = phi.particle_number() != psi.particle_number();
  hermitian_ = prop_.symmetric() && phi == psi;
  gamma_ = psi.gamma();
  for (int t = 0; t < psi.num_blocks(); ++t) {
    const auto& blk = psi.block(t);
    const double g = blk.gamma();
    for (int j = 0; j < blk.num_slots(); ++j)
      if (blk.weights[j] != cd(0.0)) slots_.push_back({blk.first(j), blk.second(j), t, blk.weights[j] / g});
  }
  double bra_factor = 1.0;
  for (const auto& blk : phi.blocks()) {
    BraBlock bb;
    double total = 0.0, vmin = INFINITY;
    for (int j = 0; j < blk.num_slots(); ++j) {
      double p = std::norm(blk.weights[j]);
      if (p == 0.0) continue;
      bb.first.push_back(blk.first(j));
      bb.second.push_back(blk.second(j));
      bb.inv_weight.push_back(1.0 / blk.weights[j]);
      total += p;
      bb.cumulative.push_back(total);
      vmin = std::min(vmin, std::abs(blk.weights[j]));
    }
    for (auto& c : bb.cumulative) c /= total;
    bra_factor /= vmin;
    bra_.push_back(std::move(bb));
  }
  const double lpow = std::pow(prop_.norm_bound(), 2 * n_);  // kernel norm bound to the power 2N
  pointwise_ = gamma_ * bra_factor * lpow;
  moment_ = lpow;
}

void PairingEvaluator::draw(SampleRng& rng, Context& c) const {
  if (prop_.is_random()) {
    prop_.draw_path(rng, c.left_buf);
    c.left_buf.adjointInPlace();
    prop_.draw_path(rng, c.right_buf);
    c.left_adj = &c.left_buf;
    c.right = &c.right_buf;
  } else {
    c.left_adj = &prop_.left_adjoint();
    c.right = &prop_.right();
  }
  c.seq.clear();
  cd w = gamma_;
  for (const auto& bb : bra_) {
    double u = rng.uniform();
    std::size_t j = 0;
    while (j + 1 < bb.cumulative.size() && u >= bb.cumulative[j]) ++j;
    c.seq.push_back(bb.first[j]);
    c.seq.push_back(bb.second[j]);
    w *= bb.inv_weight[j];
  }
  c.weight = w * sort_sign(c.seq);
  c.rows = c.seq;
  std::sort(c.rows.begin(), c.rows.end());
  c.b.resize(n_);
  for (int t = 0; t < n_; ++t) c.b[t] = rng.sign();
}

cd PairingEvaluator::fock_value(const MatrixXcd& rows, const std::vector<int>& b, MatrixXcd& a) const {
  const int d = 2 * n_;
  a.setZero(d, d);
  for (const auto& s : slots_) {
    const cd c = s.coef * double(b[s.block]);
    for (int q = 1; q < d; ++q) {
      const cd ra_q = rows(q, s.a), rb_q = rows(q, s.b);
      for (int p = 0; p < q; ++p) a(p, q) += c * (rows(p, s.a) * rb_q - rows(p, s.b) * ra_q);
    }
  }
  for (int q = 1; q < d; ++q)
    for (int p = 0; p < q; ++p) a(q, p) = -a(p, q);
  double sign = 1.0;
  for (int t = 0; t < n_; ++t) sign *= b[t];
  return sign * pfaffian_inplace(a.data(), d);
}

cd PairingEvaluator::evaluate(Context& c, const Middle& mid) const {
  if (mismatch_) return cd(0.0);
  const int d = 2 * n_;
  c.ls.resize(d, m_);
  for (int r = 0; r < d; ++r) c.ls.row(r) = c.left_adj->row(c.rows[r]);
  switch (mid.kind) {
    case Middle::Kind::Identity:
      c.kr.noalias() = c.ls * (*c.right);
      break;
    case Middle::Kind::Diagonal:
      c.tmp = c.ls * mid.diag.asDiagonal();
      c.kr.noalias() = c.tmp * (*c.right);
      break;
    case Middle::Kind::Dense:
      c.tmp.noalias() = c.ls * mid.dense;
      c.kr.noalias() = c.tmp * (*c.right);
      break;
    case Middle::Kind::LowRank:
      c.kr.noalias() = c.ls * (*c.right);
      c.tmp.noalias() = mid.vt * (*c.right);
      c.kr.noalias() += (c.ls * mid.u) * c.tmp;
      break;
  }
  return c.weight * fock_value(c.kr, c.b, c.a);
}

cd PairingEvaluator::exact(const MatrixXcd& kernel) const {
  if (mismatch_) return cd(0.0);
  double patterns = 1.0;
  for (const auto& bb : bra_) patterns *= static_cast<double>(bb.first.size());
  if (patterns * std::ldexp(1.0, n_) > std::ldexp(1.0, 26))
    throw CapacityError("exact overlap: more than 2^26 pattern and sign combinations");
  const int d = 2 * n_;
  std::vector<std::size_t> choice(bra_.size(), 0);
  MatrixXcd rows(d, m_), a;
  std::vector<int> b(n_);
  cd total(0.0);
  while (true) {
    std::vector<int> seq;
    cd w = gamma_;
    double prob = 1.0;
    for (std::size_t t = 0; t < bra_.size(); ++t) {
      const auto& bb = bra_[t];
      std::size_t j = choice[t];
      seq.push_back(bb.first[j]);
      seq.push_back(bb.second[j]);
      w *= bb.inv_weight[j];
      prob *= bb.cumulative[j] - (j ? bb.cumulative[j - 1] : 0.0);
    }
    w *= sort_sign(seq);
    std::sort(seq.begin(), seq.end());
    for (int r = 0; r < d; ++r) rows.row(r) = kernel.row(seq[r]);
    cd avg(0.0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_); ++mask) {
      for (int t = 0; t < n_; ++t) b[t] = (mask >> t & 1U) ? -1 : 1;
      avg += fock_value(rows, b, a);
    }
    total += prob * w * avg / std::ldexp(1.0, n_);
    int t = static_cast<int>(bra_.size()) - 1;
    while (t >= 0 && ++choice[t] == bra_[t].first.size()) choice[t--] = 0;
    if (t < 0) break;
  }
  return total;
}

namespace {

// A single-slot bra that selects exactly the occupied modes of x.
ApsgState bra_for_fock(const FockState& x) {
  auto occ = x.occupied();
  std::vector<ApsgBlock> blocks;
  for (std::size_t i = 0; i + 1 < occ.size(); i += 2) blocks.push_back({{occ[i], occ[i + 1]}, {cd(1.0)}});
  return ApsgState(x.num_modes(), std::move(blocks));
}

void check_fock(const GaussianMap& g, const ApsgState& psi, const FockState& x) {
  if (g.num_modes() != psi.num_modes() || x.num_modes() != psi.num_modes())
    throw ValidationError("map, state and Fock bra must share the mode count");
}

}  // namespace

cd one_shot_fock(const GaussianMap& g, const ApsgState& psi, const FockState& x, const std::vector<int>& b) {
  check_fock(g, psi, x);
  if (static_cast<int>(b.size()) != psi.num_blocks())
    throw ValidationError("sign vector length must equal the number of blocks");
  for (int s : b)
    if (s != 1 && s != -1) throw ValidationError("sign vector entries must be +1 or -1");
  if (x.particle_number() != psi.particle_number()) return cd(0.0);
  PairingEvaluator ev(Propagation::fixed(GaussianMap::identity(psi.num_modes()), g), psi, psi);
  auto rows_idx = x.occupied();
  MatrixXcd rows(rows_idx.size(), psi.num_modes()), a;
  for (std::size_t r = 0; r < rows_idx.size(); ++r) rows.row(r) = g.matrix().row(rows_idx[r]);
  return ev.fock_value(rows, b, a);
}

Estimate estimate_fock_overlap(const GaussianMap& g, const ApsgState& psi, const FockState& x, double eps,
                               double delta, const SamplingOptions& opt) {
  check_fock(g, psi, x);
  const double lpow = std::pow(g.op_norm(), 2 * psi.num_blocks());
  if (x.particle_number() != psi.particle_number()) {
    Estimate e;
    e.epsilon = 0.0;
    e.delta = delta;
    e.aggregation = "exact";
    return e;
  }
  // The bra e_x has unit weights, so the one-shot is gamma times one_shot_fock.
  PairingEvaluator ev(Propagation::fixed(GaussianMap::identity(psi.num_modes()), g), bra_for_fock(x), psi);
  Sampler s;
  s.make_worker = [&ev] {
    auto ctx = std::make_shared<PairingEvaluator::Context>();
    return [&ev, ctx](SampleRng& rng) {
      ev.draw(rng, *ctx);
      return ev.evaluate(*ctx, Middle::identity());
    };
  };
  s.pointwise_bound = ev.gamma() * lpow;
  Estimate e = run_sampler(s, eps * ev.gamma() * lpow, delta, opt);
  e.extras["gamma"] = ev.gamma();
  e.extras["op_norm_power"] = lpow;
  return e;
}

Estimate estimate_diagonal_family(const PairingEvaluator& ev, DiagonalDraw draw, double weight_bound,
                                  bool real_target, double eps, double delta, const SamplingOptions& opt,
                                  const BoundOverride* override_bounds) {
  if (ev.particle_mismatch()) {
    Estimate e;
    e.delta = delta;
    e.aggregation = "exact";
    return e;
  }
  Sampler s;
  s.make_worker = [&ev, draw] {
    auto ctx = std::make_shared<PairingEvaluator::Context>();
    auto d = std::make_shared<VectorXcd>(ev.num_modes());
    auto mid = std::make_shared<Middle>(Middle::diagonal(VectorXcd::Ones(ev.num_modes())));
    return [&ev, draw, ctx, mid](SampleRng& rng) {
      cd w = draw(rng, mid->diag);
      ev.draw(rng, *ctx);
      return w * ev.evaluate(*ctx, *mid);
    };
  };
  s.pointwise_bound = weight_bound * ev.pointwise_unit();
  s.moment_bound = weight_bound * ev.moment_unit();
  if (override_bounds) {
    s.pointwise_bound = override_bounds->pointwise;
    s.moment_bound = override_bounds->moment;
    s.certified = override_bounds->certified;
  }
  s.real_target = real_target;
  Estimate e = run_sampler(s, eps, delta, opt);
  e.extras["gamma"] = ev.gamma();
  e.extras["op_norm_power"] = ev.moment_unit();
  return e;
}

Estimate estimate_apsg_overlap(const GaussianMap& g, const ApsgState& phi, const ApsgState& psi, double eps,
                               double delta, const SamplingOptions& opt) {
  PairingEvaluator ev(Propagation::fixed(GaussianMap::identity(psi.num_modes()), g), phi, psi);
  const double lpow = ev.moment_unit();
  Estimate e = estimate_diagonal_family(
      ev, [](SampleRng&, VectorXcd&) { return cd(1.0); }, 1.0, false, eps * lpow, delta, opt);
  return e;
}

cd exact_apsg_overlap(const GaussianMap& g, const ApsgState& phi, const ApsgState& psi) {
  PairingEvaluator ev(Propagation::fixed(GaussianMap::identity(psi.num_modes()), g), phi, psi);
  return ev.exact(g.matrix());
}

}  // namespace pfmc
