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

// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "../unit/test_util.hpp"
#include "hubbard.hpp"
#include "interacting.hpp"
#include "observables.hpp"
#include "oracles.hpp"
#include "overlap.hpp"
#include "pfaffian.hpp"
#include "runner.hpp"
#include "sources.hpp"

#ifndef PFMC_CLI_PATH
#define PFMC_CLI_PATH "pfmc"
#endif
#ifndef PFMC_SOURCE_DIR
#define PFMC_SOURCE_DIR "."
#endif

using namespace pfmc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  auto start = Clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += " (time limit " + std::to_string(static_cast<int>(limit_s)) + " s exceeded)";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d. %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

FockState random_fock(std::mt19937_64& rng, int m, int k) {
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uint64_t bits = 0;
  for (int i = 0; i < k; ++i) bits |= std::uint64_t{1} << idx[i];
  return FockState(m, bits);
}

// Fock bra that overlaps the ket: one slot per block plus a random unitary later.
std::vector<int> sign_vector(std::uint32_t mask, int n) {
  std::vector<int> b(n);
  for (int t = 0; t < n; ++t) b[t] = (mask >> t & 1U) ? -1 : 1;
  return b;
}

// ---- criterion 5 helpers --------------------------------------------------

struct Calibration {
  std::string name;
  std::function<double(std::uint64_t seed)> error;  // |estimate - oracle| for one run
};

Observable rdm_obs(int p, int q, int r, int s) {
  Observable o;
  o.terms.push_back({1.0, {{p, true}, {q, true}, {s, false}, {r, false}}});
  return o;
}

Observable hubbard_observable(const SumOfSquares& h) {
  Observable o = Observable::one_body(h.h1);
  for (std::size_t l = 0; l < h.factors.size(); ++l) {
    Observable f = Observable::one_body(h.factors[l]);
    for (const auto& a : f.terms)
      for (const auto& b : f.terms) {
        auto ops = a.ops;
        ops.insert(ops.end(), b.ops.begin(), b.ops.end());
        o.terms.push_back({0.5 * h.lambdas[l] * a.coef * b.coef, ops});
      }
  }
  return o;
}

SumOfSquares small_hubbard(const LatticeSpec& lat, double u) {
  SumOfSquares h;
  const int m = lat.num_modes();
  h.h1 = hopping_matrix(lat, 1.0);
  for (int s = 0; s < lat.num_sites(); ++s) {
    MatrixXcd f = MatrixXcd::Zero(m, m);
    f(lat.up(s), lat.up(s)) = 1.0;
    f(lat.down(s), lat.down(s)) = 1.0;
    h.factors.push_back(f);
    h.lambdas.push_back(u);
    h.h1(lat.up(s), lat.up(s)) -= u / 2;
    h.h1(lat.down(s), lat.down(s)) -= u / 2;
  }
  return h;
}

// Value columns of a result CSV, wall_time dropped.
std::string value_columns(const std::string& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out += line.substr(0, line.rfind(',')) + "\n";
  }
  return out;
}

}  // namespace

int main() {
  const double eps5 = 0.05, delta5 = 0.05;

  criterion(1, "Pfaffian suite (500 skew matrices, pf^2 = det, congruence)", 5.0, [] {
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
      const int n = 2 + rep % 11;
      MatrixXcd a = testing::random_skew(rng, n);
      MatrixXcd x = testing::random_matrix(rng, n, n);
      cd pf = pfaffian(a);
      cd det = a.determinant();
      // LU leaves a residue on singular (odd) inputs; Hadamard's bound sets the scale.
      double hadamard = 1.0;
      for (int c = 0; c < n; ++c) hadamard *= a.col(c).norm();
      worst = std::max(worst, std::abs(pf * pf - det) / std::max({1.0, std::abs(det), hadamard}));
      cd lhs = pfaffian(congruence(a, x));
      cd rhs = x.determinant() * pf;
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    return Outcome{worst <= 1e-9, "max relative error " + fmt("%.2e", worst)};
  });

  criterion(2, "Pfaffian-wedge identity (N <= 4)", 5.0, [] {
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n)
      for (int rep = 0; rep < 10; ++rep) {
        MatrixXcd a = testing::random_skew(rng, 2 * n);
        std::vector<MatrixXcd> copies(n, a);
        double fact = 1.0;
        for (int k = 2; k <= n; ++k) fact *= k;
        cd w = wedge_top_coefficient_oracle(copies) / fact;
        cd pf = pfaffian(a);
        worst = std::max(worst, std::abs(w - pf) / std::max(1.0, std::abs(pf)));
      }
    return Outcome{worst <= 1e-10, "max relative error " + fmt("%.2e", worst)};
  });

  criterion(3, "Exact-filter equivalence (50 instances, unitary and non-unitary)", 60.0, [] {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const int n = 1 + rep % 6;
      const int m = std::min(16, 2 * n + 2 + static_cast<int>(rng() % 5));
      ApsgState psi = testing::random_apsg(rng, m, n, 3);
      MatrixXcd g = rep % 2 ? testing::random_matrix(rng, m, m) * 0.6 : testing::random_unitary(rng, m);
      GaussianMap map(g);
      FockState x = random_fock(rng, m, 2 * n);
      cd avg = 0.0;
      for (std::uint32_t mask = 0; mask < (1U << n); ++mask) avg += one_shot_fock(map, psi, x, sign_vector(mask, n));
      avg *= psi.gamma() / static_cast<double>(1U << n);
      cd ref = oracle_amplitude(g, psi, x);
      worst = std::max(worst, std::abs(avg - ref) / std::max(1.0, std::abs(ref)));
    }
    return Outcome{worst <= 1e-10, "max error " + fmt("%.2e", worst)};
  });

  criterion(4, "Pointwise and second-moment bounds (N <= 4)", 60.0, [] {
    std::mt19937_64 rng(4);
    double worst_point = -1e300, worst_moment = -1e300;
    for (int rep = 0; rep < 40; ++rep) {
      const int n = 1 + rep % 4;
      const int m = 2 * n + 2 + static_cast<int>(rng() % 4);
      ApsgState psi = testing::random_apsg(rng, m, n, 3);
      const double scale = 0.3 + 0.4 * (rep % 3);
      GaussianMap g(rep % 2 ? MatrixXcd(testing::random_matrix(rng, m, m) * scale)
                            : MatrixXcd(testing::random_unitary(rng, m)));
      FockState x = random_fock(rng, m, 2 * n);
      const double lp = std::pow(g.op_norm(), 2 * n);
      double second = 0.0;
      for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        const double v = std::abs(one_shot_fock(g, psi, x, sign_vector(mask, n)));
        worst_point = std::max(worst_point, v - lp);
        second += v * v;
      }
      second /= static_cast<double>(1U << n);
      worst_moment = std::max(worst_moment, second - lp * lp);
    }
    return Outcome{worst_point <= 1e-9 && worst_moment <= 1e-9,
                   "max(|X| - B) " + fmt("%.2e", worst_point) + ", max(E|X|^2 - B^2) " + fmt("%.2e", worst_moment)};
  });

  criterion(5, "Monte Carlo calibration (100 runs per estimator, eps = delta = 0.05)", 600.0, [&] {
    std::mt19937_64 rng(5);
    const int m = 8;
    ApsgState phi = testing::random_apsg(rng, m, 2, 2), psi = testing::random_apsg(rng, m, 2, 3);
    GaussianMap ul(testing::random_unitary(rng, m)), ur(testing::random_unitary(rng, m));
    GaussianMap nonunitary(MatrixXcd(testing::random_matrix(rng, m, m) * 0.25));
    FockState x = random_fock(rng, m, 4);
    LatticeSpec lat2 = LatticeSpec::open_square(2, 1);
    LatticeSpec lat22 = LatticeSpec::open_square(2, 2);
    QuenchConfig q;
    q.lattice = lat22;
    q.dimers = {{0, 1}, {2, 3}};
    ApsgState dimers = build_initial_state(q);
    GaussianMap hop = hopping_evolution(lat22, 1.0, 0.7);
    QuenchConfig d2;
    d2.lattice = lat2;
    d2.doublons = {0};
    d2.holons = {1};
    ApsgState doublon = build_initial_state(d2);
    GaussianMap hop2 = hopping_evolution(lat2, 1.0, 0.4);
    SumOfSquares h2 = small_hubbard(lat2, 1.0);
    std::vector<int> s{0, 3, 5};
    std::vector<int> omega{1, 1, 0, 0, 1, 1, 0, 0};

    auto opt = [](std::uint64_t seed) {
      SamplingOptions o;
      o.seed = seed;
      return o;
    };
    std::vector<Calibration> cal;
    {
      cd ref = oracle_amplitude(ur.matrix(), psi, x);
      cal.push_back({"fock overlap", [=](std::uint64_t sd) {
                       return std::abs(estimate_fock_overlap(ur, psi, x, eps5 / psi.gamma(), delta5, opt(sd)).value - ref);
                     }});
    }
    {
      cd ref = exact_apsg_overlap(ur, phi, psi);
      cal.push_back({"apsg overlap", [=](std::uint64_t sd) {
                       return std::abs(estimate_apsg_overlap(ur, phi, psi, eps5, delta5, opt(sd)).value - ref);
                     }});
    }
    {
      cd ref = exact_apsg_overlap(nonunitary, phi, psi);
      const double lp = std::pow(nonunitary.op_norm(), 2 * psi.num_blocks());
      cal.push_back({"non-unitary overlap", [=](std::uint64_t sd) {
                       return std::abs(estimate_apsg_overlap(nonunitary, phi, psi, eps5, delta5, opt(sd)).value - ref) /
                              lp;
                     }});
    }
    {
      cd ref = oracle_transition(Observable::number_product(s), ul, ur, phi, psi);
      cal.push_back({"correlator", [=](std::uint64_t sd) {
                       return std::abs(
                           estimate_transition_correlator(ul, ur, phi, psi, s, eps5, delta5, opt(sd)).value - ref);
                     }});
    }
    {
      std::vector<int> ms{1, 4}, a{1, 0};
      Observable proj = Observable::from_diagonal([](std::uint64_t b) {
        return cd(((b >> 1 & 1U) == 1 && (b >> 4 & 1U) == 0) ? 1.0 : 0.0);
      });
      cd ref = oracle_expectation(proj, ur, psi);
      cal.push_back({"marginal", [=](std::uint64_t sd) {
                       return std::abs(estimate_marginal(ur, psi, ms, a, eps5, delta5, opt(sd)).value - ref);
                     }});
    }
    {
      StateVector v = apply_single_particle_map(hop.matrix(), apsg_to_statevector(dimers));
      std::vector<double> hist(5, 0.0);
      for (std::uint64_t b = 0; b < v.size(); ++b) {
        int w = 0;
        for (int i = 0; i < m; ++i) w += (b >> i & 1U) * omega[i];
        hist[w] += std::norm(v[b]);
      }
      cal.push_back({"binned distribution", [=](std::uint64_t sd) {
                       auto d = estimate_binned_distribution(hop, dimers, omega, eps5, delta5, opt(sd));
                       double e = 0.0;
                       for (std::size_t k = 0; k < hist.size(); ++k) e = std::max(e, std::abs(d.probabilities[k] - hist[k]));
                       return e;
                     }});
    }
    {
      std::vector<int> c{0, 1, 3, 2};
      Observable w = Observable::from_diagonal([c](std::uint64_t b) {
        for (int j : c)
          if ((b >> j & 1U) && (b >> (j + 4) & 1U)) return cd(0.0);
        return cd(1.0);
      });
      cd ref = oracle_expectation(w, hop, dimers);
      cal.push_back({"Wilson loop", [=](std::uint64_t sd) {
                       return std::abs(estimate_wilson_loop(hop, dimers, c, eps5, delta5, opt(sd)).value - ref);
                     }});
    }
    {
      Observable o1;
      o1.terms.push_back({1.0, {{2, true}, {5, false}}});
      cd ref1 = oracle_transition(o1, ul, ur, phi, psi);
      cal.push_back({"1-RDM element", [=](std::uint64_t sd) {
                       return std::abs(transition_rdm_element(ul, ur, phi, psi, {2, 5}, eps5, delta5, opt(sd)).value - ref1);
                     }});
      cd ref2 = oracle_transition(rdm_obs(1, 4, 6, 3), ul, ur, phi, psi);
      cal.push_back({"2-RDM element", [=](std::uint64_t sd) {
                       return std::abs(
                           transition_rdm_element(ul, ur, phi, psi, {1, 4, 6, 3}, eps5, delta5, opt(sd)).value - ref2);
                     }});
    }
    {
      GaussianMap id = GaussianMap::identity(4);
      cd ref = oracle_transition(hubbard_observable(h2), id, hop2, doublon, doublon);
      cal.push_back({"Hamiltonian element", [=](std::uint64_t sd) {
                       return std::abs(
                           hamiltonian_transition_element(id, hop2, doublon, doublon, h2, eps5, delta5, opt(sd)).value -
                           ref);
                     }});
    }
    {
      Observable hh = hubbard_observable(h2);
      Observable a;
      a.terms.push_back({1.0, {{0, true}, {1, false}}});
      a.terms.push_back({-1.0, {{1, true}, {0, false}}});
      Observable comm;
      for (const auto& [x1, y1, sgn] : {std::tuple{&hh, &a, 1.0}, std::tuple{&a, &hh, -1.0}})
        for (const auto& t1 : x1->terms)
          for (const auto& t2 : y1->terms) {
            auto ops = t1.ops;
            ops.insert(ops.end(), t2.ops.begin(), t2.ops.end());
            comm.terms.push_back({sgn * t1.coef * t2.coef, ops});
          }
      cd ref = oracle_expectation(comm, hop2, doublon);
      cal.push_back({"orbital gradient", [=](std::uint64_t sd) {
                       return std::abs(orbital_gradient(hop2, doublon, h2, 0, 1, eps5, delta5, opt(sd)).value - ref);
                     }});
    }
    {
      QuenchConfig t2;
      t2.lattice = lat2;
      t2.dimers = {{0, 1}};
      ApsgState trip = build_initial_state(t2);
      double ref = oracle_hs_parity(lat2, 1.0, 1.0, 0.25, 1, doublon, {0, 3});
      cal.push_back({"HS parity (rigorous budget)", [=](std::uint64_t sd) {
                       return std::abs(
                           estimate_hs_parity(lat2, 1.0, 1.0, 0.25, 1, doublon, {0, 3}, eps5, delta5, opt(sd)).value -
                           ref);
                     }});
      std::vector<CircuitElement> circ{CircuitElement::layer(hop2), CircuitElement::gate(0, 2, kPi / 8),
                                       CircuitElement::layer(hop2)};
      cd refx = oracle_circuit_overlap(circ, trip, trip);
      cal.push_back({"extent overlap", [=](std::uint64_t sd) {
                       return std::abs(estimate_extent_overlap(circ, trip, trip, eps5, delta5, opt(sd)).value - refx);
                     }});
    }

    bool ok = true;
    std::ostringstream detail;
    for (const auto& c : cal) {
      int fails = 0;
      auto t0 = Clock::now();
      for (std::uint64_t run = 0; run < 100; ++run)
        if (c.error(1000 + run) > eps5) ++fails;
      const double rate = fails / 100.0;
      ok = ok && rate <= 0.10;
      std::printf("       %-28s failure rate %.2f [%.1f s]\n", c.name.c_str(), rate,
                  std::chrono::duration<double>(Clock::now() - t0).count());
      std::fflush(stdout);
      detail.str("");
    }
    return Outcome{ok, std::to_string(cal.size()) + " estimators, each failure rate <= 0.10 required"};
  });

  criterion(6, "Charge-phase identity and enumerated Wilson loop", 60.0, [] {
    double worst = 0.0;
    const double expect[3] = {1.0, 1.0, 0.0};
    for (int qv = 0; qv < 3; ++qv) worst = std::max(worst, std::abs(charge_phase_value(qv) - expect[qv]));
    QuenchConfig q;
    q.lattice = LatticeSpec::open_square(2, 2);
    q.dimers = {{0, 2}, {1, 3}};
    ApsgState psi = build_initial_state(q);
    GaussianMap u = hopping_evolution(q.lattice, 1.0, 0.9);
    double worst_loop = 0.0;
    for (const auto& c : std::vector<std::vector<int>>{{0, 1, 3, 2}, {0, 1}, {2}}) {
      Observable w = Observable::from_diagonal([c](std::uint64_t b) {
        for (int j : c)
          if ((b >> j & 1U) && (b >> (j + 4) & 1U)) return cd(0.0);
        return cd(1.0);
      });
      worst_loop = std::max(worst_loop, std::abs(wilson_loop_enumerated(u, psi, c) - oracle_expectation(w, u, psi)));
    }
    return Outcome{worst <= 1e-14 && worst_loop <= 1e-10,
                   "phase values error " + fmt("%.1e", worst) + ", loop error " + fmt("%.1e", worst_loop)};
  });

  criterion(7, "Wilson sample-complexity calibration", 1.0, [] {
    bool ok = std::abs(wilson_sample_complexity(22, 0.01, 0.01).calibrated - 1e3) < 1e-9;
    std::string detail = "K(22) = " + fmt("%.0f", wilson_sample_complexity(22, 0.01, 0.01).calibrated);
    const std::pair<int, double> points[] = {{54, 1e7}, {62, 1e8}, {70, 1e9}};
    for (auto [len, target] : points) {
      double k = wilson_sample_complexity(len, 0.01, 0.01).calibrated;
      ok = ok && k >= target / 2 && k <= target * 2;
      detail += ", K(" + std::to_string(len) + ") = " + fmt("%.3g", k);
    }
    return Outcome{ok, detail};
  });

  criterion(8, "Hoeffding budget and zero-interaction envelope", 1.0, [] {
    const double k = hoeffding_samples(1.0, 0.01, 0.01);
    ComplexityEnvelope e = hs_complexity_envelope(0.0, 2.0, 0.5, 16, 8, 1.0, 0.01, 0.01);
    const bool ok = k == 105967.0 && e.a == 0.0 && e.B_typ == 1.0;
    return Outcome{ok, "K = " + fmt("%.0f", k) + ", a = " + fmt("%g", e.a) + ", B_typ = " + fmt("%g", e.B_typ)};
  });

  criterion(9, "Quench suite on 2x3 against the statevector oracle (eps 0.02, delta 0.01)", 900.0, [] {
    ExperimentConfig cfg = load_experiment(std::string(PFMC_SOURCE_DIR) + "/configs/quench_2x3.json");
    cfg.eps = 0.02;
    cfg.delta = 0.01;
    PreparedExperiment p(cfg);
    RunResult ref = p.oracle();
    RunResult mc = p.run(1);
    double worst = 0.0;
    std::string worst_row;
    for (std::size_t k = 0; k < mc.rows.size(); ++k) {
      const double e = std::abs(mc.rows[k].estimate.value - ref.rows[k].estimate.value);
      if (e > worst) {
        worst = e;
        worst_row = mc.rows[k].observable + "[" + mc.rows[k].params + "]";
      }
    }
    // The shipped golden file must agree with the oracle it was produced from.
    std::ifstream golden(std::string(PFMC_SOURCE_DIR) + "/configs/golden/quench_2x3_oracle.csv");
    std::string line;
    std::size_t row = 0;
    double golden_err = 0.0;
    bool golden_ok = static_cast<bool>(golden);
    bool header = false;
    while (golden_ok && std::getline(golden, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      std::stringstream ss(line);
      std::string obs, params, re;
      std::getline(ss, obs, ',');
      std::getline(ss, params, ',');
      std::getline(ss, re, ',');
      if (row >= ref.rows.size() || obs != ref.rows[row].observable || params != ref.rows[row].params) {
        golden_ok = false;
        break;
      }
      golden_err = std::max(golden_err, std::abs(std::stod(re) - ref.rows[row].estimate.value.real()));
      ++row;
    }
    golden_ok = golden_ok && row == ref.rows.size() && golden_err < 1e-12;
    return Outcome{worst <= 0.02 && golden_ok && mc.rows.size() == ref.rows.size(),
                   std::to_string(mc.rows.size()) + " rows, max error " + fmt("%.4f", worst) + " at " + worst_row +
                       (golden_ok ? ", golden file matches" : ", golden file mismatch")};
  });

  criterion(10, "HS parity (W = 4, k = 2) and extent estimator", 300.0, [] {
    LatticeSpec lat = LatticeSpec::open_square(2, 1);
    QuenchConfig q;
    q.lattice = lat;
    q.dimers = {{0, 1}};
    ApsgState trip = build_initial_state(q);
    QuenchConfig d;
    d.lattice = lat;
    d.doublons = {0};
    d.holons = {1};
    ApsgState doublon = build_initial_state(d);
    SamplingOptions o;
    o.seed = 10;
    double worst = 0.0;
    for (const auto& [psi, modes] : {std::pair{doublon, std::vector<int>{0, 2}}, std::pair{trip, std::vector<int>{0}},
                                     std::pair{doublon, std::vector<int>{1}}}) {
      Estimate e = estimate_hs_parity(lat, 1.0, 4.0, 0.25, 2, psi, modes, 0.05, 0.05, o, HsBudget::Typical);
      worst = std::max(worst, std::abs(e.value.real() - oracle_hs_parity(lat, 1.0, 4.0, 0.25, 2, psi, modes)));
    }
    GaussianMap u = hopping_evolution(lat, 1.0, 0.6);
    std::vector<CircuitElement> circ{CircuitElement::layer(u), CircuitElement::gate(0, 3, kPi / 8),
                                     CircuitElement::layer(u)};
    Estimate x = estimate_extent_overlap(circ, doublon, doublon, 0.05, 0.05, o);
    const double ext = std::abs(x.value - oracle_circuit_overlap(circ, doublon, doublon));
    return Outcome{worst <= 0.05 && ext <= 0.05,
                   "HS max error " + fmt("%.4f", worst) + " (typical-scale budget), extent error " + fmt("%.4f", ext)};
  });

  criterion(11, "Determinism of pfmc run across 1 and 8 threads", 0.0, [] {
    const fs::path dir = fs::temp_directory_path() / ("pfmc_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string cfg = std::string(PFMC_SOURCE_DIR) + "/configs/quench_2x2.json";
    std::string csv[2];
    int idx = 0;
    for (int threads : {1, 8}) {
      const fs::path out = dir / ("t" + std::to_string(threads));
      const std::string cmd = std::string("\"") + PFMC_CLI_PATH + "\" run \"" + cfg + "\" --seed 42 --threads " +
                              std::to_string(threads) + " --out \"" + out.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return Outcome{false, "pfmc run failed: " + cmd};
      csv[idx++] = value_columns((out / "quench_2x2.csv").string());
    }
    fs::remove_all(dir);
    const bool same = !csv[0].empty() && csv[0] == csv[1];
    return Outcome{same, same ? "value columns byte-identical" : "outputs differ"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
