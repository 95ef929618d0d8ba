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

#include "runner.hpp"

#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "errors.hpp"
#include "hubbard.hpp"
#include "interacting.hpp"
#include "observables.hpp"
#include "oracles.hpp"
#include "overlap.hpp"
#include "sources.hpp"

#ifndef PFMC_VERSION
#define PFMC_VERSION "0.0.0"
#endif

namespace pfmc {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, const char*>> kKinds = {
    {ExperimentKind::Overlap, "overlap"},
    {ExperimentKind::Correlator, "correlator"},
    {ExperimentKind::Marginal, "marginal"},
    {ExperimentKind::Binned, "binned"},
    {ExperimentKind::Rdm, "rdm"},
    {ExperimentKind::HamiltonianElement, "hamiltonian_element"},
    {ExperimentKind::Wilson, "wilson"},
    {ExperimentKind::QuenchSuite, "quench_suite"},
    {ExperimentKind::HsParity, "hs_parity"},
    {ExperimentKind::Extent, "extent"},
    {ExperimentKind::Envelope, "envelope"},
    {ExperimentKind::Noci, "noci"},
    {ExperimentKind::AfqmcOverlap, "afqmc_overlap"},
    {ExperimentKind::OrbitalGradient, "orbital_gradient"},
};

// ---- schema helpers -------------------------------------------------------

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(path + "." + key + ": required field missing");
  return *it;
}

template <class T>
T as(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + ": wrong type");
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
  return as<T>(field(j, key, path), path + "." + key);
}

template <class T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as<T>(j.at(key), path + "." + key);
}

// Runs a lower-level parser and prefixes its message with the field path.
template <class F>
auto with_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

MatrixXcd parse_matrix(const json& j, const std::string& path) {
  auto read = [&](const json& rows, const std::string& p, bool allow_pairs) {
    if (!rows.is_array() || rows.empty()) throw ValidationError(p + ": expected a non-empty list of rows");
    const std::size_t n = rows.size();
    const std::size_t m = rows[0].is_array() ? rows[0].size() : 0;
    MatrixXcd out = MatrixXcd::Zero(static_cast<int>(n), static_cast<int>(m));
    for (std::size_t r = 0; r < n; ++r) {
      if (!rows[r].is_array() || rows[r].size() != m) throw ValidationError(p + ": rows must have equal length");
      for (std::size_t c = 0; c < m; ++c) {
        const json& e = rows[r][c];
        if (e.is_number()) out(r, c) = e.get<double>();
        else if (allow_pairs && e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
          out(r, c) = cd(e[0].get<double>(), e[1].get<double>());
        else throw ValidationError(p + ": entries must be numbers" + std::string(allow_pairs ? " or [re, im]" : ""));
      }
    }
    return out;
  };
  if (j.is_object()) {
    MatrixXcd re = read(field(j, "re", path), path + ".re", false);
    if (j.contains("im")) {
      MatrixXcd im = read(j.at("im"), path + ".im", false);
      if (im.rows() != re.rows() || im.cols() != re.cols()) throw ValidationError(path + ": re and im shapes differ");
      re += cd(0.0, 1.0) * im;
    }
    return re;
  }
  return read(j, path, true);
}

MatrixXcd parse_square(const json& j, const std::string& path, int m) {
  MatrixXcd x = parse_matrix(j, path);
  if (x.rows() != x.cols()) throw ValidationError(path + ": matrix must be square");
  if (m >= 0 && x.rows() != m)
    throw ValidationError(path + ": expected " + std::to_string(m) + " x " + std::to_string(m) + " matrix");
  return x;
}

MatrixXcd random_unitary(int m, std::uint64_t seed) {
  MatrixXcd z(m, m);
  std::uint64_t k = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      SampleRng rng(seed, k++);
      double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
      double r = std::sqrt(-2.0 * std::log(u1));
      z(i, j) = cd(r * std::cos(2 * kPi * u2), r * std::sin(2 * kPi * u2)) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<MatrixXcd> qr(z);
  MatrixXcd q = qr.householderQ();
  MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    cd d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

LatticeSpec parse_lattice(const json& j, const std::string& path) {
  return with_path(path, [&] { return lattice_from_json(j); });
}

// Auxiliary-field sign pattern: explicit, or drawn from a seed.
std::vector<std::vector<int>> parse_sigma(const json& j, const std::string& path, int sites, std::uint64_t stream) {
  std::vector<std::vector<int>> sigma;
  if (j.contains("sigma")) {
    sigma = get<std::vector<std::vector<int>>>(j, "sigma", path);
    for (const auto& s : sigma) {
      if (static_cast<int>(s.size()) != sites) throw ValidationError(path + ".sigma: one entry per site per slice");
      for (int v : s)
        if (v != 1 && v != -1) throw ValidationError(path + ".sigma: entries must be +1 or -1");
    }
    return sigma;
  }
  const int slices = get<int>(j, "slices", path);
  if (slices < 1) throw ValidationError(path + ".slices: must be at least 1");
  const auto seed = derive_seed(get_or<std::uint64_t>(j, "sigma_seed", path, 0), stream);
  for (int l = 0; l < slices; ++l) {
    SampleRng rng(seed, static_cast<std::uint64_t>(l));
    std::vector<int> s(sites);
    for (int& v : s) v = rng.sign();
    sigma.push_back(s);
  }
  return sigma;
}

// Imaginary-time walker prod_l e^{-dtau h0/2} e^{lambda sigma (n_up - n_dn)} e^{-dtau h0/2}
// with cosh(lambda) = e^{dtau U / 2}.
GaussianMap walker_map(const json& j, const std::string& path, std::uint64_t stream) {
  LatticeSpec lat = parse_lattice(field(j, "lattice", path), path + ".lattice");
  const double J = get_or<double>(j, "J", path, lat.J);
  const double u = get<double>(j, "U", path);
  const double dtau = get<double>(j, "dtau", path);
  if (!(dtau > 0.0) || u < 0.0) throw ValidationError(path + ": need dtau > 0 and U >= 0");
  const double lambda = std::acosh(std::exp(dtau * u / 2.0));
  auto sigma = parse_sigma(j, path, lat.num_sites(), stream);
  const int l = lat.num_sites();
  MatrixXcd half = expm_hermitian(hopping_matrix(lat, J), cd(-dtau / 2.0, 0.0));
  MatrixXcd g = MatrixXcd::Identity(2 * l, 2 * l);
  for (const auto& s : sigma) {
    VectorXcd v(2 * l);
    for (int site = 0; site < l; ++site) {
      v(lat.up(site)) = std::exp(lambda * s[site]);
      v(lat.down(site)) = std::exp(-lambda * s[site]);
    }
    g = half * v.asDiagonal() * half * g;
  }
  return GaussianMap(g);
}

GaussianMap parse_map(const json& j, const std::string& path, int m) {
  const std::string type = get<std::string>(j, "type", path);
  GaussianMap g;
  if (type == "identity") {
    g = GaussianMap::identity(get_or<int>(j, "modes", path, m));
  } else if (type == "matrix") {
    g = GaussianMap(parse_square(j, path, -1));
  } else if (type == "hopping") {
    LatticeSpec lat = parse_lattice(field(j, "lattice", path), path + ".lattice");
    g = hopping_evolution(lat, get_or<double>(j, "J", path, lat.J), get<double>(j, "t", path));
  } else if (type == "phases") {
    g = diagonal_phase(get<std::vector<double>>(j, "theta", path));
  } else if (type == "random_unitary") {
    const int n = get_or<int>(j, "modes", path, m);
    if (n < 1) throw ValidationError(path + ".modes: must be positive");
    g = GaussianMap(random_unitary(n, get<std::uint64_t>(j, "seed", path)));
  } else if (type == "compose") {
    const json& maps = field(j, "maps", path);
    if (!maps.is_array() || maps.empty()) throw ValidationError(path + ".maps: expected a non-empty list");
    g = parse_map(maps[0], path + ".maps[0]", m);
    for (std::size_t k = 1; k < maps.size(); ++k) {
      GaussianMap next = parse_map(maps[k], path + ".maps[" + std::to_string(k) + "]", m);
      if (next.num_modes() != g.num_modes()) throw ValidationError(path + ".maps: mode counts differ");
      g = compose(next, g);
    }
  } else if (type == "adjoint") {
    g = adjoint(parse_map(field(j, "map", path), path + ".map", m));
  } else if (type == "exp") {
    g = GaussianMap(expm(parse_square(field(j, "generator", path), path + ".generator", m)));
  } else if (type == "walker") {
    g = walker_map(j, path, 0);
  } else {
    throw ValidationError(path + ".type: unknown map type '" + type +
                          "' (identity, matrix, hopping, phases, random_unitary, compose, adjoint, exp, walker)");
  }
  if (m >= 0 && g.num_modes() != m)
    throw ValidationError(path + ": map acts on " + std::to_string(g.num_modes()) + " modes, expected " +
                          std::to_string(m));
  return g;
}

ApsgState parse_state(const json& j, const std::string& path) {
  const std::string type = get_or<std::string>(j, "type", path, "apsg");
  if (type == "apsg") return with_path(path, [&] { return apsg_from_json(j); });
  if (type == "psi4") {
    const int n = get<int>(j, "n", path);
    if (n < 0) throw ValidationError(path + ".n: must be >= 0");
    return psi4_product(n);
  }
  if (type == "quench") return with_path(path, [&] { return build_initial_state(quench_from_json(j)); });
  throw ValidationError(path + ".type: unknown state type '" + type + "' (apsg, psi4, quench)");
}

bool is_fock(const json& j) { return j.is_object() && j.value("type", std::string()) == "fock"; }

FockState parse_fock(const json& j, const std::string& path, int m) {
  FockState x;
  if (j.contains("bits")) x = with_path(path, [&] { return FockState::from_string(get<std::string>(j, "bits", path)); });
  else x = with_path(path, [&] { return FockState::from_occupations(get<std::vector<int>>(j, "occupations", path)); });
  if (x.num_modes() != m) throw ValidationError(path + ": Fock state has the wrong number of modes");
  return x;
}

SumOfSquares parse_hamiltonian(const json& j, const std::string& path, int m) {
  const std::string type = get<std::string>(j, "type", path);
  SumOfSquares h;
  h.e0 = get_or<double>(j, "e0", path, 0.0);
  if (type == "hubbard") {
    // U n_up n_dn = U/2 (n_up + n_dn)^2 - U/2 (n_up + n_dn).
    LatticeSpec lat = parse_lattice(field(j, "lattice", path), path + ".lattice");
    if (lat.num_modes() != m) throw ValidationError(path + ".lattice: mode count differs from the state");
    const double u = get<double>(j, "U", path);
    h.h1 = hopping_matrix(lat, get_or<double>(j, "J", path, lat.J));
    for (int s = 0; s < lat.num_sites(); ++s) {
      MatrixXcd f = MatrixXcd::Zero(m, m);
      f(lat.up(s), lat.up(s)) = 1.0;
      f(lat.down(s), lat.down(s)) = 1.0;
      h.factors.push_back(f);
      h.lambdas.push_back(u);
      h.h1(lat.up(s), lat.up(s)) -= u / 2.0;
      h.h1(lat.down(s), lat.down(s)) -= u / 2.0;
    }
  } else if (type == "sum_of_squares") {
    h.h1 = j.contains("h1") ? parse_square(j.at("h1"), path + ".h1", m) : MatrixXcd::Zero(m, m);
    h.lambdas = get_or<std::vector<double>>(j, "lambdas", path, {});
    const json& fs = j.contains("factors") ? j.at("factors") : json::array();
    for (std::size_t k = 0; k < fs.size(); ++k)
      h.factors.push_back(parse_square(fs[k], path + ".factors[" + std::to_string(k) + "]", m));
  } else {
    throw ValidationError(path + ".type: unknown Hamiltonian type '" + type + "' (hubbard, sum_of_squares)");
  }
  with_path(path, [&] {
    h.validate(m);
    return 0;
  });
  return h;
}

std::vector<int> parse_modes(const json& j, const std::string& key, const std::string& path) {
  return get<std::vector<int>>(j, key, path);
}

// ---- oracle observables ---------------------------------------------------

Observable product(const Observable& a, const Observable& b, cd scale = 1.0) {
  Observable out;
  for (const auto& x : a.terms)
    for (const auto& y : b.terms) {
      auto ops = x.ops;
      ops.insert(ops.end(), y.ops.begin(), y.ops.end());
      out.terms.push_back({scale * x.coef * y.coef, ops});
    }
  return out;
}

Observable hamiltonian_observable(const SumOfSquares& h) {
  Observable o = Observable::one_body(h.h1);
  if (h.e0 != 0.0) o.terms.push_back({h.e0, {}});
  for (std::size_t l = 0; l < h.factors.size(); ++l) {
    Observable f = Observable::one_body(h.factors[l]);
    Observable sq = product(f, f, 0.5 * h.lambdas[l]);
    o.terms.insert(o.terms.end(), sq.terms.begin(), sq.terms.end());
  }
  return o;
}

Observable identity_observable() {
  Observable o;
  o.terms.push_back({1.0, {}});
  return o;
}

Observable rdm_observable(const std::vector<int>& idx) {
  Observable o;
  if (idx.size() == 2) o.terms.push_back({1.0, {{idx[0], true}, {idx[1], false}}});
  else o.terms.push_back({1.0, {{idx[0], true}, {idx[1], true}, {idx[3], false}, {idx[2], false}}});
  return o;
}

std::string join(const std::vector<int>& v, const char* sep = "-") {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? sep : "") + std::to_string(v[k]);
  return s;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

Estimate exact_estimate(cd v, const char* method = "oracle") {
  Estimate e;
  e.value = v;
  e.aggregation = method;
  return e;
}

// Left/right maps of a transition element; "map" sets both.
std::pair<GaussianMap, GaussianMap> parse_pair(const json& in, int m) {
  if (in.contains("map")) {
    GaussianMap g = parse_map(in.at("map"), "inputs.map", m);
    return {g, g};
  }
  return {parse_map(field(in, "left_map", "inputs"), "inputs.left_map", m),
          parse_map(field(in, "right_map", "inputs"), "inputs.right_map", m)};
}

// Ket from "state" or "ket"; bra from "bra" or else the ket.
std::pair<ApsgState, ApsgState> parse_bra_ket(const json& in) {
  const char* ket_key = in.contains("ket") ? "ket" : "state";
  ApsgState psi = parse_state(field(in, ket_key, "inputs"), std::string("inputs.") + ket_key);
  ApsgState phi = in.contains("bra") ? parse_state(in.at("bra"), "inputs.bra") : psi;
  if (phi.num_modes() != psi.num_modes()) throw ValidationError("inputs.bra: mode count differs from the ket");
  return {phi, psi};
}

std::vector<std::vector<int>> parse_mode_sets(const json& in, const char* single, const char* multi) {
  if (in.contains(multi)) return get<std::vector<std::vector<int>>>(in, multi, "inputs");
  return {get<std::vector<int>>(in, single, "inputs")};
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "unknown";
}

const char* library_version() { return PFMC_VERSION; }

ExperimentConfig parse_experiment(const json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  ExperimentConfig c;
  c.raw = j;
  const std::string kind = get<std::string>(j, "kind", "config");
  bool found = false;
  for (const auto& [k, name] : kKinds)
    if (kind == name) {
      c.kind = k;
      found = true;
    }
  if (!found) {
    std::string names;
    for (const auto& [k, name] : kKinds) names += std::string(names.empty() ? "" : ", ") + name;
    throw ValidationError("config.kind: unknown kind '" + kind + "' (expected one of " + names + ")");
  }
  c.inputs = field(j, "inputs", "config");
  if (!c.inputs.is_object()) throw ValidationError("config.inputs: expected an object");
  const json& b = field(j, "budget", "config");
  c.eps = get<double>(b, "eps", "config.budget");
  c.delta = get<double>(b, "delta", "config.budget");
  if (!(c.eps > 0.0) || !std::isfinite(c.eps)) throw ValidationError("config.budget.eps: must be positive");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ValidationError("config.budget.delta: must lie in (0, 1)");
  c.fixed_samples = get_or<std::int64_t>(b, "fixed_samples", "config.budget", 0);
  if (c.fixed_samples < 0) throw ValidationError("config.budget.fixed_samples: must be >= 0");
  c.max_samples = get_or<double>(b, "max_samples", "config.budget", 1e10);
  c.seed = get_or<std::uint64_t>(j, "seed", "config", 0);
  c.output_path = get_or<std::string>(j, "output_path", "config", "");
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  return parse_experiment(j);
}

json resolved_config(const ExperimentConfig& cfg) {
  json j = cfg.raw;
  j["seed"] = cfg.seed;
  j["budget"] = {{"eps", cfg.eps}, {"delta", cfg.delta}, {"fixed_samples", cfg.fixed_samples},
                 {"max_samples", cfg.max_samples}};
  return j;
}

PreparedExperiment::PreparedExperiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  const json& in = cfg_.inputs;
  const double eps = cfg_.eps, delta = cfg_.delta;
  // One task per row unless noted.
  auto add = [&](std::string obs, std::string params, std::function<Estimate(const SamplingOptions&)> run,
                 std::function<Estimate()> oracle) {
    tasks_.push_back([obs, params, run](const SamplingOptions& o) {
      return std::vector<ResultRow>{{obs, params, run(o), "", 0.0}};
    });
    oracles_.push_back([obs, params, oracle] { return std::vector<ResultRow>{{obs, params, oracle(), "", 0.0}}; });
  };
  auto add_formula = [&](std::string obs, std::string params, double value, double bound,
                         std::map<std::string, double> extras = {}) {
    Estimate e = exact_estimate(value, "formula");
    e.bound = bound;
    e.extras = std::move(extras);
    e.epsilon = eps;
    e.delta = delta;
    add(obs, params, [e](const SamplingOptions&) { return e; }, [e] { return e; });
  };

  switch (cfg_.kind) {
    case ExperimentKind::Overlap: {
      ApsgState psi = parse_state(field(in, "ket", "inputs"), "inputs.ket");
      GaussianMap g = parse_map(field(in, "map", "inputs"), "inputs.map", psi.num_modes());
      const json& bra = field(in, "bra", "inputs");
      if (is_fock(bra)) {
        FockState x = parse_fock(bra, "inputs.bra", psi.num_modes());
        add("overlap", "bra=" + x.to_string(),
            [=](const SamplingOptions& o) { return estimate_fock_overlap(g, psi, x, eps, delta, o); },
            [=] { return exact_estimate(oracle_amplitude(g.matrix(), psi, x)); });
      } else {
        ApsgState phi = parse_state(bra, "inputs.bra");
        if (phi.num_modes() != psi.num_modes()) throw ValidationError("inputs.bra: mode count differs from the ket");
        GaussianMap id = GaussianMap::identity(psi.num_modes());
        add("overlap", "", [=](const SamplingOptions& o) { return estimate_apsg_overlap(g, phi, psi, eps, delta, o); },
            [=] { return exact_estimate(oracle_transition(identity_observable(), id, g, phi, psi)); });
      }
      break;
    }
    case ExperimentKind::Correlator: {
      auto [phi, psi] = parse_bra_ket(in);
      auto [gl, gr] = parse_pair(in, psi.num_modes());
      for (const auto& s : parse_mode_sets(in, "modes", "mode_sets")) {
        add("n_S", "S=" + join(s),
            [=](const SamplingOptions& o) {
              return estimate_transition_correlator(gl, gr, phi, psi, s, eps, delta, o);
            },
            [=] { return exact_estimate(oracle_transition(Observable::number_product(s), gl, gr, phi, psi)); });
      }
      break;
    }
    case ExperimentKind::Marginal: {
      ApsgState psi = parse_state(field(in, "state", "inputs"), "inputs.state");
      GaussianMap u = parse_map(field(in, "map", "inputs"), "inputs.map", psi.num_modes());
      auto modes = parse_modes(in, "modes", "inputs");
      auto patterns = in.contains("patterns") ? get<std::vector<std::vector<int>>>(in, "patterns", "inputs")
                                              : std::vector<std::vector<int>>{get<std::vector<int>>(in, "pattern", "inputs")};
      for (const auto& a : patterns) {
        if (a.size() != modes.size()) throw ValidationError("inputs.pattern: length must equal the number of modes");
        add("P", "S=" + join(modes) + ";a=" + join(a, ""),
            [=](const SamplingOptions& o) { return estimate_marginal(u, psi, modes, a, eps, delta, o); },
            [=] {
              Observable proj = Observable::from_diagonal([modes, a](std::uint64_t b) {
                for (std::size_t k = 0; k < modes.size(); ++k)
                  if (static_cast<int>(b >> modes[k] & 1U) != a[k]) return cd(0.0);
                return cd(1.0);
              });
              return exact_estimate(oracle_expectation(proj, u, psi));
            });
      }
      break;
    }
    case ExperimentKind::Binned: {
      ApsgState psi = parse_state(field(in, "state", "inputs"), "inputs.state");
      GaussianMap u = parse_map(field(in, "map", "inputs"), "inputs.map", psi.num_modes());
      auto omega = parse_modes(in, "omega", "inputs");
      if (static_cast<int>(omega.size()) != psi.num_modes())
        throw ValidationError("inputs.omega: need one weight per mode");
      long total = 0;
      for (int w : omega) {
        if (w < 0) throw ValidationError("inputs.omega: weights must be >= 0");
        total += w;
      }
      if (total > kMaxBinnedOmega)
        throw CapacityError("inputs.omega: Omega_max = " + std::to_string(total) + " exceeds " +
                            std::to_string(kMaxBinnedOmega));
      tasks_.push_back([=](const SamplingOptions& o) {
        BinnedDistribution d = estimate_binned_distribution(u, psi, omega, eps, delta, o);
        const double n = static_cast<double>(d.probabilities.size());
        double var = 0.0;
        for (std::size_t k = 0; k < d.coefficients.size(); ++k)
          var += (k == 0 ? 1.0 : 2.0) * d.coefficients[k].std_error * d.coefficients[k].std_error;
        std::vector<ResultRow> rows;
        for (std::size_t w = 0; w < d.probabilities.size(); ++w) {
          Estimate e;
          e.value = d.probabilities[w];
          e.std_error = std::sqrt(var) / n;
          e.samples = d.samples;
          e.epsilon = d.epsilon;
          e.delta = d.delta;
          e.bound = 1.0;
          e.aggregation = d.coefficients.front().aggregation;
          e.certified = d.coefficients.front().certified;
          rows.push_back({"P_Omega", "Omega=" + std::to_string(w), e, "", 0.0});
        }
        return rows;
      });
      oracles_.push_back([=] {
        if (psi.num_modes() > kOracleMaxModes) throw CapacityError("oracle: more than 16 modes");
        StateVector v = apply_single_particle_map(u.matrix(), apsg_to_statevector(psi));
        std::vector<double> hist(total + 1, 0.0);
        for (std::uint64_t b = 0; b < v.size(); ++b) {
          long w = 0;
          for (int i = 0; i < psi.num_modes(); ++i) w += (b >> i & 1U) * omega[i];
          hist[w] += std::norm(v[b]);
        }
        std::vector<ResultRow> rows;
        for (std::size_t w = 0; w < hist.size(); ++w)
          rows.push_back({"P_Omega", "Omega=" + std::to_string(w), exact_estimate(hist[w]), "", 0.0});
        return rows;
      });
      break;
    }
    case ExperimentKind::Rdm: {
      auto [phi, psi] = parse_bra_ket(in);
      auto [gl, gr] = parse_pair(in, psi.num_modes());
      const double step = get_or<double>(in, "step", "inputs", kDefaultSourceStep);
      for (const auto& idx : get<std::vector<std::vector<int>>>(in, "elements", "inputs")) {
        if (idx.size() != 2 && idx.size() != 4) throw ValidationError("inputs.elements: entries must be [p,q] or [p,q,r,s]");
        for (int i : idx)
          if (i < 0 || i >= psi.num_modes()) throw ValidationError("inputs.elements: mode out of range");
        std::string params = idx.size() == 2 ? "p=" + std::to_string(idx[0]) + ";q=" + std::to_string(idx[1])
                                             : "p=" + std::to_string(idx[0]) + ";q=" + std::to_string(idx[1]) +
                                                   ";r=" + std::to_string(idx[2]) + ";s=" + std::to_string(idx[3]);
        add(idx.size() == 2 ? "gamma" : "Gamma", params,
            [=](const SamplingOptions& o) {
              return transition_rdm_element(gl, gr, phi, psi, idx, eps, delta, o, step);
            },
            [=] { return exact_estimate(oracle_transition(rdm_observable(idx), gl, gr, phi, psi)); });
      }
      break;
    }
    case ExperimentKind::HamiltonianElement: {
      auto [phi, psi] = parse_bra_ket(in);
      auto [gl, gr] = parse_pair(in, psi.num_modes());
      SumOfSquares h = parse_hamiltonian(field(in, "hamiltonian", "inputs"), "inputs.hamiltonian", psi.num_modes());
      const double step = get_or<double>(in, "step", "inputs", kDefaultSourceStep);
      add("H", "",
          [=](const SamplingOptions& o) {
            return hamiltonian_transition_element(gl, gr, phi, psi, h, eps, delta, o, step);
          },
          [=] { return exact_estimate(oracle_transition(hamiltonian_observable(h), gl, gr, phi, psi)); });
      break;
    }
    case ExperimentKind::Wilson: {
      ApsgState psi = parse_state(field(in, "state", "inputs"), "inputs.state");
      GaussianMap u = parse_map(field(in, "map", "inputs"), "inputs.map", psi.num_modes());
      const int l = psi.num_modes() / 2;
      for (const auto& c : parse_mode_sets(in, "contour", "contours")) {
        with_path("inputs.contours", [&] {
          validate_contour(c, psi.num_modes());
          return 0;
        });
        add("W_C", "C=" + join(c) + ";len=" + std::to_string(c.size()),
            [=](const SamplingOptions& o) { return estimate_wilson_loop(u, psi, c, eps, delta, o); },
            [=] {
              Observable w = Observable::from_diagonal([c, l](std::uint64_t b) {
                for (int j : c)
                  if ((b >> j & 1U) && (b >> (j + l) & 1U)) return cd(0.0);
                return cd(1.0);
              });
              return exact_estimate(oracle_expectation(w, u, psi));
            });
      }
      break;
    }
    case ExperimentKind::QuenchSuite: {
      QuenchConfig q = with_path("inputs", [&] { return quench_from_json(in); });
      // Oracle rows are computed once and handed out per task.
      auto cache = std::make_shared<std::optional<std::vector<QuenchRow>>>();
      std::size_t row = 0;
      auto push = [&](std::string obs, std::string params, double t,
                      std::function<Estimate(const SamplingOptions&)> run) {
        std::string p = "t=" + short_num(t) + (params.empty() ? "" : ";" + params);
        const std::size_t k = row++;
        tasks_.push_back([obs, p, run](const SamplingOptions& o) {
          return std::vector<ResultRow>{{obs, p, run(o), "", 0.0}};
        });
        oracles_.push_back([obs, p, k, q, cache] {
          if (!*cache) *cache = oracle_quench_suite(q);
          return std::vector<ResultRow>{{obs, p, (**cache)[k].estimate, "", 0.0}};
        });
      };
      for (double t : q.times) {
        push("N_d", "", t, [=](const SamplingOptions& o) { return doublon_number(q, t, eps, delta, o); });
        for (const auto& [i, j] : q.czz_pairs)
          push("C_zz", "i=" + std::to_string(i) + ";j=" + std::to_string(j), t,
               [=, i = i, j = j](const SamplingOptions& o) { return spin_correlator_czz(q, i, j, t, eps, delta, o); });
        push("n_triplets", "", t, [=](const SamplingOptions& o) { return triplet_density(q, t, eps, delta, o); });
        for (const auto& c : q.wilson_contours)
          push("W_C", "C=" + join(c) + ";len=" + std::to_string(c.size()), t,
               [=](const SamplingOptions& o) { return quench_wilson_loop(q, c, t, eps, delta, o); });
      }
      break;
    }
    case ExperimentKind::HsParity: {
      LatticeSpec lat = parse_lattice(field(in, "lattice", "inputs"), "inputs.lattice");
      const double J = get_or<double>(in, "J", "inputs", lat.J);
      const double W = get<double>(in, "W", "inputs");
      const double dt = get<double>(in, "dt", "inputs");
      const int slices = get<int>(in, "slices", "inputs");
      if (!(dt > 0.0) || slices < 1 || W < 0.0)
        throw ValidationError("inputs: need dt > 0, slices >= 1 and W >= 0");
      ApsgState psi = parse_state(field(in, "state", "inputs"), "inputs.state");
      if (psi.num_modes() != lat.num_modes()) throw ValidationError("inputs.state: mode count differs from the lattice");
      const std::string b = get_or<std::string>(in, "hs_budget", "inputs", "worst");
      if (b != "worst" && b != "typical") throw ValidationError("inputs.hs_budget: expected \"worst\" or \"typical\"");
      const HsBudget budget = b == "worst" ? HsBudget::Worst : HsBudget::Typical;
      for (const auto& t : parse_mode_sets(in, "modes", "mode_sets")) {
        for (int i : t)
          if (i < 0 || i >= psi.num_modes()) throw ValidationError("inputs.modes: mode out of range");
        add("Pi_T", "T=" + join(t),
            [=](const SamplingOptions& o) {
              return estimate_hs_parity(lat, J, W, dt, slices, psi, t, eps, delta, o, budget);
            },
            [=] { return exact_estimate(oracle_hs_parity(lat, J, W, dt, slices, psi, t)); });
      }
      break;
    }
    case ExperimentKind::Extent: {
      auto [phi, psi] = parse_bra_ket(in);
      const int m = psi.num_modes();
      std::vector<CircuitElement> circ;
      const json& cj = field(in, "circuit", "inputs");
      if (!cj.is_array()) throw ValidationError("inputs.circuit: expected a list");
      for (std::size_t k = 0; k < cj.size(); ++k) {
        const std::string p = "inputs.circuit[" + std::to_string(k) + "]";
        if (cj[k].contains("map")) {
          circ.push_back(CircuitElement::layer(parse_map(cj[k].at("map"), p + ".map", m)));
        } else {
          auto ij = get<std::vector<int>>(cj[k], "gate", p);
          if (ij.size() != 2 || ij[0] == ij[1] || ij[0] < 0 || ij[1] < 0 || ij[0] >= m || ij[1] >= m)
            throw ValidationError(p + ".gate: expected two distinct modes in range");
          const double theta = get<double>(cj[k], "theta", p);
          if (!(theta >= 0.0 && theta <= kPi / 2)) throw ValidationError(p + ".theta: must lie in [0, pi/2]");
          circ.push_back(CircuitElement::gate(ij[0], ij[1], theta));
        }
      }
      add("overlap", "",
          [=](const SamplingOptions& o) { return estimate_extent_overlap(circ, phi, psi, eps, delta, o); },
          [=] { return exact_estimate(oracle_circuit_overlap(circ, phi, psi)); });
      break;
    }
    case ExperimentKind::Envelope: {
      auto list = [&](const char* key) {
        const json& v = field(in, key, "inputs");
        return v.is_array() ? as<std::vector<double>>(v, std::string("inputs.") + key)
                            : std::vector<double>{as<double>(v, std::string("inputs.") + key)};
      };
      if (in.contains("W") || in.contains("t")) {
        auto ws = list("W"), ts = list("t");
        const bool by_k = in.contains("k");
        const int k = get_or<int>(in, "k", "inputs", 1);
        const double dt_fixed = by_k ? 0.0 : get<double>(in, "dt", "inputs");
        if (by_k && k < 1) throw ValidationError("inputs.k: must be at least 1");
        const int sites = get<int>(in, "L", "inputs");
        const int r = get<int>(in, "r", "inputs");
        const double c_t = get_or<double>(in, "C_T", "inputs", 1.0);
        for (double w : ws)
          for (double t : ts) {
            const double dt = by_k ? t / k : dt_fixed;
            ComplexityEnvelope e = with_path("inputs", [&] {
              return hs_complexity_envelope(w, t, dt, sites, r, c_t, eps, delta);
            });
            const std::string p = "W=" + short_num(w) + ";t=" + short_num(t);
            add_formula("a", p, e.a, 0.0);
            // r is the caller's choice; 2N reproduces the estimator's pathwise bound.
            add_formula("B_worst", p, e.B_worst, e.B_worst, {{"r", r}, {"C_T", c_t}});
            add_formula("B_typ", p, e.B_typ, e.B_typ);
            add_formula("K_worst", p, e.K_worst, e.B_worst);
            add_formula("K_typ", p, e.K_typ, e.B_typ);
          }
      }
      for (int len : get_or<std::vector<int>>(in, "wilson_lengths", "inputs", {})) {
        WilsonComplexity w = with_path("inputs.wilson_lengths", [&] { return wilson_sample_complexity(len, eps, delta); });
        const double b = std::pow(2.0 / std::sqrt(3.0), len);
        add_formula("K_wilson_hoeffding", "len=" + std::to_string(len), w.hoeffding, b);
        add_formula("K_wilson_calibrated", "len=" + std::to_string(len), w.calibrated, b);
      }
      if (tasks_.empty()) throw ValidationError("inputs: envelope needs W and t, or wilson_lengths");
      break;
    }
    case ExperimentKind::Noci: {
      auto [phi, psi] = parse_bra_ket(in);
      const int m = psi.num_modes();
      GaussianMap ul = parse_map(field(in, "U_L", "inputs"), "inputs.U_L", m);
      GaussianMap ur = parse_map(field(in, "U_R", "inputs"), "inputs.U_R", m);
      GaussianMap g = compose(adjoint(ul), ur);
      GaussianMap id = GaussianMap::identity(m);
      add("S_LR", "", [=](const SamplingOptions& o) { return estimate_apsg_overlap(g, phi, psi, eps, delta, o); },
          [=] { return exact_estimate(oracle_transition(identity_observable(), ul, ur, phi, psi)); });
      if (in.contains("hamiltonian")) {
        SumOfSquares h = parse_hamiltonian(in.at("hamiltonian"), "inputs.hamiltonian", m);
        const double step = get_or<double>(in, "step", "inputs", kDefaultSourceStep);
        add("H_LR", "",
            [=](const SamplingOptions& o) {
              return hamiltonian_transition_element(ul, ur, phi, psi, h, eps, delta, o, step);
            },
            [=] { return exact_estimate(oracle_transition(hamiltonian_observable(h), ul, ur, phi, psi)); });
      }
      break;
    }
    case ExperimentKind::AfqmcOverlap: {
      ApsgState trial = parse_state(field(in, "trial", "inputs"), "inputs.trial");
      ApsgState init = in.contains("initial") ? parse_state(in.at("initial"), "inputs.initial") : trial;
      if (init.num_modes() != trial.num_modes()) throw ValidationError("inputs.initial: mode count differs");
      const json& wj = field(in, "walker", "inputs");
      const int walkers = get_or<int>(in, "walkers", "inputs", 1);
      if (walkers < 1) throw ValidationError("inputs.walkers: must be at least 1");
      GaussianMap id = GaussianMap::identity(trial.num_modes());
      for (int w = 0; w < walkers; ++w) {
        GaussianMap b = walker_map(wj, "inputs.walker", static_cast<std::uint64_t>(w));
        if (b.num_modes() != trial.num_modes()) throw ValidationError("inputs.walker: mode count differs");
        add("W_sigma", "walker=" + std::to_string(w),
            [=](const SamplingOptions& o) { return estimate_apsg_overlap(b, trial, init, eps, delta, o); },
            [=] { return exact_estimate(oracle_transition(identity_observable(), id, b, trial, init)); });
      }
      break;
    }
    case ExperimentKind::OrbitalGradient: {
      ApsgState psi = parse_state(field(in, "state", "inputs"), "inputs.state");
      const int m = psi.num_modes();
      GaussianMap u = parse_map(field(in, "map", "inputs"), "inputs.map", m);
      SumOfSquares h = parse_hamiltonian(field(in, "hamiltonian", "inputs"), "inputs.hamiltonian", m);
      const double step = get_or<double>(in, "step", "inputs", kDefaultSourceStep);
      for (const auto& pq : get<std::vector<std::vector<int>>>(in, "pairs", "inputs")) {
        if (pq.size() != 2 || pq[0] < 0 || pq[1] < 0 || pq[0] >= m || pq[1] >= m)
          throw ValidationError("inputs.pairs: entries must be [p, q] with modes in range");
        const int p = pq[0], q = pq[1];
        add("g", "p=" + std::to_string(p) + ";q=" + std::to_string(q),
            [=](const SamplingOptions& o) { return orbital_gradient(u, psi, h, p, q, eps, delta, o, step); },
            [=] {
              Observable hh = hamiltonian_observable(h);
              Observable a;
              a.terms.push_back({1.0, {{p, true}, {q, false}}});
              a.terms.push_back({-1.0, {{q, true}, {p, false}}});
              Observable comm = product(hh, a);
              Observable back = product(a, hh, -1.0);
              comm.terms.insert(comm.terms.end(), back.terms.begin(), back.terms.end());
              return exact_estimate(oracle_expectation(comm, u, psi));
            });
      }
      break;
    }
  }
}

namespace {

// Modelling choices the inputs left open, flagged for the reader of the output.
void collect_notes(const json& j, json& notes) {
  if (j.is_object()) {
    if (j.contains("lattice") && j.at("lattice").is_object()) {
      try {
        if (lattice_from_json(j.at("lattice")).default_phases) notes["hopping_phases"] = "unspecified links use phi = 0";
      } catch (const std::exception&) {
      }
    }
    if (j.contains("doublons") && j.at("doublons").is_array() && !j.at("doublons").empty())
      notes["doublon_representation"] = "one-slot block (j up, j down) with weight 1";
    for (const auto& [k, v] : j.items()) collect_notes(v, notes);
  } else if (j.is_array()) {
    for (const auto& v : j) collect_notes(v, notes);
  }
}

RunResult assemble(const PreparedExperiment& p, std::vector<ResultRow> rows, const char* mode) {
  RunResult r;
  r.rows = std::move(rows);
  const ExperimentConfig& c = p.config();
  json meta_rows = json::array();
  for (const auto& row : r.rows) {
    json extras = json::object();
    for (const auto& [k, v] : row.estimate.extras) extras[k] = v;
    meta_rows.push_back({{"observable", row.observable},
                         {"params", row.params},
                         {"certified", row.estimate.certified},
                         {"bias", row.estimate.bias},
                         {"aggregation", row.estimate.aggregation},
                         {"extras", extras}});
  }
  r.metadata = {{"pfmc_version", library_version()},
                {"mode", mode},
                {"kind", kind_name(c.kind)},
                {"seed", c.seed},
                {"config", resolved_config(c)},
                {"rows", meta_rows}};
  json notes = json::object();
  collect_notes(c.inputs, notes);
  if (!notes.empty()) r.metadata["notes"] = notes;
  return r;
}

}  // namespace

RunResult PreparedExperiment::run(int threads) const {
  std::vector<ResultRow> rows;
  for (std::size_t k = 0; k < tasks_.size(); ++k) {
    SamplingOptions o;
    o.seed = derive_seed(cfg_.seed, k);
    o.threads = threads;
    o.fixed_samples = cfg_.fixed_samples;
    o.max_samples = cfg_.max_samples;
    auto start = std::chrono::steady_clock::now();
    auto out = tasks_[k](o);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& row : out) {
      row.wall_time = wall;
      row.method = row.estimate.aggregation;
      rows.push_back(std::move(row));
    }
  }
  return assemble(*this, std::move(rows), "run");
}

RunResult PreparedExperiment::oracle() const {
  std::vector<ResultRow> rows;
  for (const auto& task : oracles_) {
    auto start = std::chrono::steady_clock::now();
    auto out = task();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& row : out) {
      row.wall_time = wall;
      row.method = row.estimate.aggregation;
      rows.push_back(std::move(row));
    }
  }
  return assemble(*this, std::move(rows), "oracle");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string sidecar_path(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() >= ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0)
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".json";
  return csv_path + ".json";
}

}  // namespace

std::string result_csv(const RunResult& r) {
  std::ostringstream out;
  const json& m = r.metadata;
  out << "# pfmc " << library_version() << "; kind " << m.value("kind", std::string("?")) << "; mode "
      << m.value("mode", std::string("?")) << "; seed " << m.value("seed", std::uint64_t{0})
      << "; resolved config in the JSON sidecar\n";
  out << kCsvHeader << "\n";
  for (const auto& row : r.rows) {
    const Estimate& e = row.estimate;
    out << csv_field(row.observable) << ',' << csv_field(row.params) << ',' << num(e.value.real()) << ','
        << num(e.value.imag()) << ',' << num(e.std_error) << ',' << e.samples << ',' << num(e.bound) << ','
        << num(e.epsilon) << ',' << num(e.delta) << ',' << csv_field(row.method) << ',' << num(row.wall_time)
        << '\n';
  }
  return out.str();
}

void write_result(const RunResult& r, const std::string& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write '" + csv_path + "'");
  csv << result_csv(r);
  std::ofstream side(sidecar_path(csv_path));
  if (!side) throw std::runtime_error("cannot write '" + sidecar_path(csv_path) + "'");
  side << r.metadata.dump(2) << '\n';
}

std::string plot_data(const std::string& text, const json& spec) {
  if (!spec.is_object()) throw ValidationError("plotspec: expected a JSON object");
  const std::string x_key = get<std::string>(spec, "x", "plotspec");
  const std::string y_col = get_or<std::string>(spec, "y", "plotspec", "value_re");
  const std::string err_col = get_or<std::string>(spec, "yerr", "plotspec", "std_error");
  std::vector<std::string> wanted = get_or<std::vector<std::string>>(spec, "series", "plotspec", {});

  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  struct Point {
    std::string x, y, err;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Point>> series;
  bool any_rows = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv_line(line);
    if (header.empty()) {
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) throw ValidationError("plotdata: row with the wrong number of columns");
    any_rows = true;
    auto col = [&](const std::string& name) -> const std::string& {
      for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return cells[k];
      throw ValidationError("plotdata: result has no column '" + name + "'");
    };
    std::string x, rest;
    std::istringstream ps(col("params"));
    std::string kv;
    while (std::getline(ps, kv, ';')) {
      auto eq = kv.find('=');
      if (eq != std::string::npos && kv.substr(0, eq) == x_key) x = kv.substr(eq + 1);
      else if (!kv.empty()) rest += (rest.empty() ? "" : ";") + kv;
    }
    if (x.empty()) continue;
    std::string id = col("observable") + (rest.empty() ? "" : "{" + rest + "}");
    if (!series.count(id)) order.push_back(id);
    series[id].push_back({x, col(y_col), col(err_col)});
  }
  std::ostringstream out;
  out << "x,y,yerr,series\n";
  if (!any_rows) return out.str();
  if (series.empty()) throw ValidationError("plotdata: no row has the parameter '" + x_key + "'");
  if (wanted.empty()) wanted = order;
  for (const auto& id : wanted)
    if (!series.count(id)) {
      std::string avail;
      for (const auto& a : order) avail += (avail.empty() ? "" : ", ") + a;
      throw ValidationError("plotdata: series '" + id + "' not found; available: " + avail);
    }
  for (const auto& id : wanted)
    for (const auto& p : series[id]) out << p.x << ',' << p.y << ',' << p.err << ',' << csv_field(id) << '\n';
  return out.str();
}

}  // namespace pfmc
