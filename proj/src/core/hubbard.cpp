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

#include "hubbard.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "errors.hpp"
#include "observables.hpp"
#include "overlap.hpp"

namespace pfmc {

namespace {

void check_site(const QuenchConfig& cfg, int s, const char* field) {
  if (s < 0 || s >= cfg.lattice.num_sites())
    throw ValidationError(std::string("quench.") + field + ": site " + std::to_string(s) + " out of range");
}

bool is_link(const LatticeSpec& lat, int a, int b) {
  for (const auto& l : lat.links)
    if ((l.i == a && l.j == b) || (l.i == b && l.j == a)) return true;
  return false;
}

std::string contour_id(const std::vector<int>& c) {
  std::string s;
  for (std::size_t k = 0; k < c.size(); ++k) s += (k ? "-" : "") + std::to_string(c[k]);
  return s;
}

// Typical-scale override for auxiliary-field propagation, else null.
std::unique_ptr<BoundOverride> hs_override(const QuenchConfig& cfg, const Propagation& prop,
                                           const PairingEvaluator& ev, double t, double scale) {
  if (!prop.is_random() || cfg.hs_budget != HsBudget::Typical) return nullptr;
  const double b = hs_typical_bound(prop.lambda(), cfg.lattice.num_sites(), t, prop.dt());
  const double per_eval = b * b * ev.pointwise_unit() / ev.moment_unit();
  return std::make_unique<BoundOverride>(BoundOverride{scale * per_eval, INFINITY, false});
}

// Unbiased one-shot of C_zz for a site pair, written with parities
// Pi = 1 - 2n: 4 Sz_i Sz_j = (Pi_{i dn} - Pi_{i up})(Pi_{j dn} - Pi_{j up}) / 4
// and 2 Sz_i = (Pi_{i dn} - Pi_{i up}) / 2. The product of means comes from
// two further independent draws.
class CzzShot {
 public:
  CzzShot(const PairingEvaluator& ev, const LatticeSpec& lat) : ev_(ev), lat_(lat) {
    mid_ = Middle::diagonal(VectorXcd::Ones(ev.num_modes()));
  }

  cd operator()(SampleRng& rng, int i, int j) {
    const int iu = lat_.up(i), id = lat_.down(i), ju = lat_.up(j), jd = lat_.down(j);
    const int a = rng.bit() ? iu : id;
    const int b = rng.bit() ? ju : jd;
    const double sy = (a == iu ? -1.0 : 1.0) * (b == ju ? -1.0 : 1.0);
    cd y = sy * parity(rng, {a, b});
    const int c = rng.bit() ? iu : id;
    cd xi = (c == iu ? -1.0 : 1.0) * parity(rng, {c});
    const int d = rng.bit() ? ju : jd;
    cd xj = (d == ju ? -1.0 : 1.0) * parity(rng, {d});
    return y - xi * xj;
  }

 private:
  cd parity(SampleRng& rng, std::initializer_list<int> modes) {
    mid_.diag.setOnes();
    for (int m : modes) mid_.diag(m) = -1.0;
    ev_.draw(rng, ctx_);
    return ev_.evaluate(ctx_, mid_);
  }

  const PairingEvaluator& ev_;
  const LatticeSpec& lat_;
  PairingEvaluator::Context ctx_;
  Middle mid_;
};

std::vector<std::pair<int, int>> link_pairs(const LatticeSpec& lat) {
  std::vector<std::pair<int, int>> out;
  for (const auto& l : lat.links) out.emplace_back(l.i, l.j);
  return out;
}

// Sum over a list of site pairs of C_zz times scale, with the pair drawn uniformly.
Estimate czz_mixture(const QuenchConfig& cfg, std::vector<std::pair<int, int>> pairs, double scale, double t,
                     double eps, double delta, const SamplingOptions& opt) {
  if (pairs.empty()) {
    Estimate e;
    e.delta = delta;
    e.aggregation = "exact";
    return e;
  }
  Propagation prop = quench_propagation(cfg, t);
  ApsgState psi = build_initial_state(cfg);
  PairingEvaluator ev(prop, psi, psi);
  const double w = scale * static_cast<double>(pairs.size());
  const double pu = ev.pointwise_unit(), mu = ev.moment_unit();
  Sampler s;
  s.make_worker = [&ev, &cfg, pairs, w] {
    auto shot = std::make_shared<CzzShot>(ev, cfg.lattice);
    return [shot, pairs, w](SampleRng& rng) {
      std::size_t k = pairs.size() == 1 ? 0 : std::min<std::size_t>(rng.uniform() * pairs.size(), pairs.size() - 1);
      return w * (*shot)(rng, pairs[k].first, pairs[k].second);
    };
  };
  s.pointwise_bound = std::abs(w) * (pu + pu * pu);
  s.moment_bound = std::abs(w) * (mu + mu * mu);
  s.real_target = true;
  if (auto ov = hs_override(cfg, prop, ev, t, 1.0)) {
    s.pointwise_bound = std::abs(w) * (ov->pointwise + ov->pointwise * ov->pointwise);
    s.moment_bound = INFINITY;
    s.certified = false;
  }
  return run_sampler(s, eps, delta, opt);
}

Estimate sum_estimates(const std::vector<Estimate>& parts, double eps, double delta) {
  Estimate e;
  e.epsilon = eps;
  e.delta = delta;
  double var = 0.0;
  for (const auto& p : parts) {
    e.value += p.value;
    var += p.std_error * p.std_error;
    e.samples += p.samples;
    e.bound += p.bound;
    e.certified = e.certified && p.certified;
  }
  e.std_error = std::sqrt(var);
  e.aggregation = parts.empty() ? "exact" : parts.front().aggregation;
  return e;
}

StateVector evolved_state(const QuenchConfig& cfg, double t) {
  StateVector v = apsg_to_statevector(build_initial_state(cfg));
  if (t == 0.0) return v;
  if (cfg.W == 0.0) return apply_single_particle_map(hopping_evolution(cfg.lattice, cfg.J, t).matrix(), v);
  return trotter_evolve(cfg.lattice, cfg.J, cfg.W, t / cfg.trotter_k, cfg.trotter_k, v);
}

}  // namespace

void QuenchConfig::validate() const {
  lattice.validate();
  const int l = lattice.num_sites();
  std::vector<int> owner(l, 0);
  auto claim = [&](int s, const char* field) {
    check_site(*this, s, field);
    if (owner[s]++) throw ValidationError(std::string("quench.") + field + ": site " + std::to_string(s) +
                                          " is assigned more than once");
  };
  for (const auto& [a, b] : dimers) {
    claim(a, "dimers");
    claim(b, "dimers");
    if (!is_link(lattice, a, b))
      throw ValidationError("quench.dimers: [" + std::to_string(a) + ", " + std::to_string(b) +
                            "] is not a lattice link");
  }
  for (int s : holons) claim(s, "holons");
  for (int s : doublons) claim(s, "doublons");
  for (int s = 0; s < l; ++s)
    if (!owner[s]) throw ValidationError("quench: site " + std::to_string(s) + " is not covered");
  if (trotter_k < 1) throw ValidationError("quench.trotter_k: must be at least 1");
  if (!std::isfinite(J) || !std::isfinite(W) || W < 0.0) throw ValidationError("quench.W: must be finite and >= 0");
  for (double t : times)
    if (!std::isfinite(t) || t < 0.0) throw ValidationError("quench.times: entries must be finite and >= 0");
  for (const auto& [i, j] : czz_pairs) {
    check_site(*this, i, "czz_pairs");
    check_site(*this, j, "czz_pairs");
    if (i == j) throw ValidationError("quench.czz_pairs: C_zz needs two distinct sites");
  }
  for (const auto& c : wilson_contours) {
    if (c.empty()) throw ValidationError("quench.wilson_contours: empty contour");
    validate_contour(c, lattice.num_modes());
  }
}

QuenchConfig quench_from_json(const nlohmann::json& j) {
  QuenchConfig cfg;
  try {
    cfg.lattice = lattice_from_json(j.at("lattice"));
    cfg.J = j.value("J", cfg.lattice.J);
    cfg.W = j.value("W", 0.0);
    for (const auto& d : j.value("dimers", nlohmann::json::array())) {
      if (!d.is_array() || d.size() != 2) throw ValidationError("quench.dimers: entries must be [j, k]");
      cfg.dimers.emplace_back(d[0].get<int>(), d[1].get<int>());
    }
    cfg.holons = j.value("holons", std::vector<int>{});
    cfg.doublons = j.value("doublons", std::vector<int>{});
    cfg.times = j.value("times", std::vector<double>{0.0});
    cfg.trotter_k = j.value("trotter_k", 4);
    for (const auto& p : j.value("czz_pairs", nlohmann::json::array())) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("quench.czz_pairs: entries must be [i, j]");
      cfg.czz_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
    cfg.wilson_contours = j.value("wilson_contours", std::vector<std::vector<int>>{});
    std::string b = j.value("hs_budget", std::string("typical"));
    if (b == "typical") cfg.hs_budget = HsBudget::Typical;
    else if (b == "worst") cfg.hs_budget = HsBudget::Worst;
    else throw ValidationError("quench.hs_budget: expected \"typical\" or \"worst\"");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("quench JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json quench_to_json(const QuenchConfig& cfg) {
  nlohmann::json d = nlohmann::json::array(), c = nlohmann::json::array();
  for (const auto& [a, b] : cfg.dimers) d.push_back({a, b});
  for (const auto& [a, b] : cfg.czz_pairs) c.push_back({a, b});
  return {{"lattice", lattice_to_json(cfg.lattice)},
          {"dimers", d},
          {"holons", cfg.holons},
          {"doublons", cfg.doublons},
          {"J", cfg.J},
          {"W", cfg.W},
          {"times", cfg.times},
          {"trotter_k", cfg.trotter_k},
          {"czz_pairs", c},
          {"wilson_contours", cfg.wilson_contours},
          {"hs_budget", cfg.hs_budget == HsBudget::Typical ? "typical" : "worst"}};
}

ApsgState build_initial_state(const QuenchConfig& cfg) {
  cfg.validate();
  const LatticeSpec& lat = cfg.lattice;
  const cd w(1.0 / std::sqrt(2.0));
  std::vector<ApsgBlock> blocks;
  for (const auto& [j, k] : cfg.dimers)
    blocks.push_back({{lat.up(j), lat.down(k), lat.down(j), lat.up(k)}, {w, w}});
  for (int j : cfg.doublons) blocks.push_back({{lat.up(j), lat.down(j)}, {cd(1.0)}});
  return ApsgState(lat.num_modes(), std::move(blocks));
}

Propagation quench_propagation(const QuenchConfig& cfg, double t) {
  if (t < 0.0) throw ValidationError("quench: time must be >= 0");
  if (t == 0.0) {
    GaussianMap id = GaussianMap::identity(cfg.lattice.num_modes());
    return Propagation::fixed(id, id);
  }
  if (cfg.W == 0.0) {
    GaussianMap u = hopping_evolution(cfg.lattice, cfg.J, t);
    return Propagation::fixed(u, u);
  }
  return Propagation::hubbard_hs(cfg.lattice, cfg.J, cfg.W, t / cfg.trotter_k, cfg.trotter_k);
}

Estimate doublon_number(const QuenchConfig& cfg, double t, double eps, double delta, const SamplingOptions& opt) {
  const int l = cfg.lattice.num_sites();
  Propagation prop = quench_propagation(cfg, t);
  ApsgState psi = build_initial_state(cfg);
  PairingEvaluator ev(prop, psi, psi);
  auto ov = hs_override(cfg, prop, ev, t, 1.0);
  std::vector<Estimate> parts;
  for (int s = 0; s < l; ++s) {
    SamplingOptions o = opt;
    o.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(s));
    parts.push_back(estimate_correlator(prop, psi, psi, {cfg.lattice.up(s), cfg.lattice.down(s)}, eps / l,
                                        delta / l, o, ov.get()));
  }
  Estimate e = sum_estimates(parts, eps, delta);
  e.extras["per_site_epsilon"] = eps / l;
  return e;
}

Estimate spin_correlator_czz(const QuenchConfig& cfg, int i, int j, double t, double eps, double delta,
                             const SamplingOptions& opt) {
  check_site(cfg, i, "czz_pairs");
  check_site(cfg, j, "czz_pairs");
  if (i == j) throw ValidationError("C_zz: sites must differ");
  return czz_mixture(cfg, {{i, j}}, 1.0, t, eps, delta, opt);
}

Estimate triplet_density(const QuenchConfig& cfg, double t, double eps, double delta, const SamplingOptions& opt) {
  return czz_mixture(cfg, link_pairs(cfg.lattice), 2.0 / cfg.lattice.num_sites(), t, eps, delta, opt);
}

Estimate quench_wilson_loop(const QuenchConfig& cfg, const std::vector<int>& contour, double t, double eps,
                            double delta, const SamplingOptions& opt) {
  validate_contour(contour, cfg.lattice.num_modes());
  Propagation prop = quench_propagation(cfg, t);
  ApsgState psi = build_initial_state(cfg);
  PairingEvaluator ev(prop, psi, psi);
  auto ov = hs_override(cfg, prop, ev, t, std::pow(2.0 / std::sqrt(3.0), static_cast<double>(contour.size())));
  return estimate_wilson_loop(prop, psi, contour, eps, delta, opt, ov.get());
}

WilsonComplexity wilson_sample_complexity(int contour_len, double eps, double delta) {
  if (contour_len <= 0) throw ValidationError("wilson_sample_complexity: |C| must be positive");
  const double b = std::pow(2.0 / std::sqrt(3.0), contour_len);
  return {hoeffding_samples(b, eps, delta), 1e3 * std::pow(4.0 / 3.0, contour_len - 22)};
}

ComplexityEnvelope hs_complexity_envelope(double W, double t, double dt, int sites, int r, double c_t, double eps,
                                          double delta) {
  if (!(dt > 0.0)) throw ValidationError("envelope: dt must be positive");
  if (!(t >= 0.0)) throw ValidationError("envelope: t must be >= 0");
  if (sites < 1 || r < 0) throw ValidationError("envelope: need L >= 1 and r >= 0");
  if (!(c_t > 0.0)) throw ValidationError("envelope: C_T must be positive");
  ComplexityEnvelope e;
  cd lambda = hirsch_lambda(W, dt);
  e.a = lambda.real();
  e.n = t / dt;
  e.B_worst = hs_worst_bound(lambda, e.n, r, c_t);
  e.B_typ = hs_typical_bound(lambda, sites, t, dt);
  e.K_worst = hoeffding_samples(e.B_worst, eps, delta);
  e.K_typ = hoeffding_samples(e.B_typ, eps, delta);
  return e;
}

std::vector<QuenchRow> run_quench_suite(const QuenchConfig& cfg, double eps, double delta,
                                        const SamplingOptions& opt) {
  cfg.validate();
  std::vector<QuenchRow> rows;
  for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
    const double t = cfg.times[ti];
    std::uint64_t stream = 0;
    auto next = [&] {
      SamplingOptions o = opt;
      o.seed = derive_seed(derive_seed(opt.seed, ti), stream++);
      return o;
    };
    rows.push_back({"N_d", "", t, doublon_number(cfg, t, eps, delta, next())});
    for (const auto& [i, j] : cfg.czz_pairs)
      rows.push_back({"C_zz", "i=" + std::to_string(i) + ";j=" + std::to_string(j), t,
                      spin_correlator_czz(cfg, i, j, t, eps, delta, next())});
    rows.push_back({"n_triplets", "", t, triplet_density(cfg, t, eps, delta, next())});
    for (const auto& c : cfg.wilson_contours)
      rows.push_back({"W_C", "C=" + contour_id(c), t, quench_wilson_loop(cfg, c, t, eps, delta, next())});
  }
  return rows;
}

std::vector<QuenchRow> oracle_quench_suite(const QuenchConfig& cfg) {
  cfg.validate();
  const LatticeSpec& lat = cfg.lattice;
  const int l = lat.num_sites();
  auto exact = [](double v) {
    Estimate e;
    e.value = v;
    e.aggregation = "oracle";
    return e;
  };
  std::vector<QuenchRow> rows;
  for (double t : cfg.times) {
    StateVector v = evolved_state(cfg, t);
    std::vector<double> p(v.size());
    for (std::uint64_t b = 0; b < v.size(); ++b) p[b] = std::norm(v[b]);
    auto n = [&](std::uint64_t b, int mode) { return static_cast<double>(b >> mode & 1U); };
    auto expect = [&](auto f) {
      double s = 0.0;
      for (std::uint64_t b = 0; b < p.size(); ++b)
        if (p[b] != 0.0) s += p[b] * f(b);
      return s;
    };
    auto czz = [&](int i, int j) {
      auto sz = [&](std::uint64_t b, int s) { return 0.5 * (n(b, lat.up(s)) - n(b, lat.down(s))); };
      double ss = expect([&](std::uint64_t b) { return sz(b, i) * sz(b, j); });
      double si = expect([&](std::uint64_t b) { return sz(b, i); });
      double sj = expect([&](std::uint64_t b) { return sz(b, j); });
      return 4.0 * (ss - si * sj);
    };
    rows.push_back({"N_d", "", t, exact(expect([&](std::uint64_t b) {
                      double s = 0.0;
                      for (int j = 0; j < l; ++j) s += n(b, lat.up(j)) * n(b, lat.down(j));
                      return s;
                    }))});
    for (const auto& [i, j] : cfg.czz_pairs)
      rows.push_back({"C_zz", "i=" + std::to_string(i) + ";j=" + std::to_string(j), t, exact(czz(i, j))});
    double trip = 0.0;
    for (const auto& lk : lat.links) trip += czz(lk.i, lk.j);
    rows.push_back({"n_triplets", "", t, exact(2.0 / l * trip)});
    for (const auto& c : cfg.wilson_contours)
      rows.push_back({"W_C", "C=" + contour_id(c), t, exact(expect([&](std::uint64_t b) {
                        double s = 1.0;
                        for (int j : c) s *= 1.0 - n(b, lat.up(j)) * n(b, lat.down(j));
                        return s;
                      }))});
  }
  return rows;
}

}  // namespace pfmc
