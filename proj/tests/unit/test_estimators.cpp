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

#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "interacting.hpp"
#include "observables.hpp"
#include "oracles.hpp"
#include "sources.hpp"
#include "test_util.hpp"

using namespace pfmc;

namespace {

SamplingOptions fixed(std::uint64_t seed, std::int64_t k = 100000) {
  SamplingOptions o;
  o.seed = seed;
  o.fixed_samples = k;
  return o;
}

void check_unbiased(const Estimate& e, cd ref) {
  INFO("value " << e.value << " oracle " << ref << " stderr " << e.std_error);
  CHECK(std::abs(e.value - ref) <= 4.0 * e.std_error + 1e-12);
}

Observable two_body(int p, int q, int r, int s) {
  Observable o;
  o.terms.push_back({1.0, {{p, true}, {q, true}, {s, false}, {r, false}}});
  return o;
}

}  // namespace

TEST_CASE("budgets") {
  CHECK(hoeffding_samples(1.0, 0.01, 0.01) == 105967.0);
  MomPlan p = mom_plan(1.0, 0.05, 0.05, false);
  CHECK(p.groups == 30);
  CHECK(p.group_size == 3200);
}

TEST_CASE("median of means") {
  std::vector<cd> v(10, cd(2.0, -1.0));
  CHECK(median_of_means(v, 3) == cd(2.0, -1.0));
  std::vector<cd> w{1.0, 2.0, 3.0, 6.0};
  CHECK(median_of_means(w, 1) == cd(3.0));
  CHECK_THROWS_AS(median_of_means({}, 1), ValidationError);
}

TEST_CASE("counter-based draws do not depend on thread count") {
  std::mt19937_64 rng(1);
  ApsgState psi = testing::random_apsg(rng, 8, 2, 2);
  GaussianMap g(testing::random_unitary(rng, 8));
  SamplingOptions a = fixed(5, 20000), b = a;
  b.threads = 4;
  Estimate ea = estimate_apsg_overlap(g, psi, psi, 0.1, 0.1, a);
  Estimate eb = estimate_apsg_overlap(g, psi, psi, 0.1, 0.1, b);
  CHECK(ea.value == eb.value);
  CHECK(ea.std_error == eb.std_error);
}

TEST_CASE("simple closed-form values") {
  SamplingOptions o;
  o.seed = 3;
  ApsgState psi1 = psi4_product(1);
  GaussianMap id = GaussianMap::identity(4);
  CHECK(std::abs(estimate_apsg_overlap(id, psi1, psi1, 0.05, 0.05, o).value - 1.0) < 1e-12);
  GaussianMap ph = diagonal_phase({kPi / 2, kPi / 2, 0, 0});
  CHECK(std::abs(estimate_apsg_overlap(ph, psi1, psi1, 0.05, 0.05, o).value) < 0.05);
  Estimate c = estimate_transition_correlator(id, id, psi1, psi1, {0, 1}, 0.05, 0.05, o);
  CHECK(std::abs(c.value - 0.5) < 0.05);
  CHECK(std::abs(estimate_marginal(id, psi1, {}, {}, 0.05, 0.05, o).value - 1.0) < 1e-12);
  CHECK(std::abs(estimate_marginal(id, psi1, {1}, {1}, 0.05, 0.05, o).value - 0.5) < 0.05);
  auto bins = estimate_binned_distribution(id, psi1, {1, 1, 0, 0}, 0.05, 0.05, o);
  REQUIRE(bins.probabilities.size() == 3);
  CHECK(std::abs(bins.probabilities[0] - 0.5) < 0.05);
  CHECK(std::abs(bins.probabilities[2] - 0.5) < 0.05);
  CHECK(std::abs(transition_rdm_element(id, id, psi1, psi1, {1, 1}, 0.05, 0.05, o).value - 0.5) < 0.05);
  CHECK(std::abs(transition_rdm_element(id, id, psi1, psi1, {1, 3}, 0.05, 0.05, o).value) < 0.05);
  ApsgState psi2 = psi4_product(2);
  SumOfSquares h;
  h.h1 = MatrixXcd::Identity(8, 8);
  Estimate n = hamiltonian_transition_element(GaussianMap::identity(8), GaussianMap::identity(8), psi2, psi2, h, 0.05,
                                              0.05, o);
  CHECK(std::abs(n.value - 4.0) < 0.05);
}

TEST_CASE("correlator and marginal match the statevector oracle") {
  std::mt19937_64 rng(17);
  const int m = 10;
  ApsgState phi = testing::random_apsg(rng, m, 2, 2), psi = testing::random_apsg(rng, m, 2, 3);
  GaussianMap gl(testing::random_unitary(rng, m)), gr(testing::random_unitary(rng, m));
  std::vector<int> s{0, 3, 4, 7, 9};
  check_unbiased(estimate_transition_correlator(gl, gr, phi, psi, s, 0.1, 0.1, fixed(1)),
                 oracle_transition(Observable::number_product(s), gl, gr, phi, psi));
  std::vector<int> ms{1, 4, 6};
  std::vector<int> a{1, 0, 1};
  Observable proj = Observable::from_diagonal([&](std::uint64_t b) {
    for (std::size_t k = 0; k < ms.size(); ++k)
      if (static_cast<int>(b >> ms[k] & 1U) != a[k]) return cd(0.0);
    return cd(1.0);
  });
  check_unbiased(estimate_marginal(gr, psi, ms, a, 0.1, 0.1, fixed(2)), oracle_expectation(proj, gr, psi));
}

TEST_CASE("parity expansion is exact when averaged over all strings") {
  std::mt19937_64 rng(23);
  const int m = 8;
  ApsgState psi = testing::random_apsg(rng, m, 2, 2);
  GaussianMap u(testing::random_unitary(rng, m));
  std::vector<int> s{0, 2, 5, 6, 7};
  cd avg = 0.0;
  for (int mask = 0; mask < 32; ++mask) {
    std::vector<int> t;
    for (int k = 0; k < 5; ++k)
      if (mask >> k & 1) t.push_back(s[k]);
    avg += ((t.size() % 2) ? -1.0 : 1.0) * oracle_expectation(Observable::parity(t), u, psi);
  }
  avg /= 32.0;
  CHECK(std::abs(avg - oracle_expectation(Observable::number_product(s), u, psi)) < 1e-10);
}

TEST_CASE("binned distribution") {
  std::mt19937_64 rng(29);
  const int m = 8;
  ApsgState psi = testing::random_apsg(rng, m, 2, 2);
  GaussianMap u(testing::random_unitary(rng, m));
  std::vector<int> omega{0, 1, 2, 0, 1, 1, 2, 0};
  const int n = 8;
  std::vector<double> hist(n, 0.0);
  StateVector v = apply_single_particle_map(u.matrix(), apsg_to_statevector(psi));
  for (std::uint64_t b = 0; b < v.size(); ++b) {
    int w = 0;
    for (int i = 0; i < m; ++i) w += (b >> i & 1U) * omega[i];
    hist[w] += std::norm(v[b]);
  }
  // Round trip through exact coefficients.
  std::vector<cd> coeff(n);
  for (int k = 0; k < n; ++k) {
    std::vector<double> th(m);
    for (int i = 0; i < m; ++i) th[i] = 2 * kPi / n * k * omega[i];
    coeff[k] = oracle_transition(Observable::from_diagonal([](std::uint64_t) { return cd(1.0); }), u,
                                 compose(diagonal_phase(th), u), psi, psi);
  }
  auto back = binned_from_coefficients(coeff);
  for (int w = 0; w < n; ++w) CHECK(std::abs(back[w] - hist[w]) < 1e-10);
  SamplingOptions o;
  o.seed = 4;
  auto est = estimate_binned_distribution(u, psi, omega, 0.05, 0.05, o);
  for (int w = 0; w < n; ++w) CHECK(std::abs(est.probabilities[w] - hist[w]) < 0.05);
  CHECK_THROWS_AS(estimate_binned_distribution(u, psi, std::vector<int>(m, 600), 0.05, 0.05, o), CapacityError);
}

TEST_CASE("RDM elements match the oracle") {
  std::mt19937_64 rng(31);
  const int m = 8;
  ApsgState phi = testing::random_apsg(rng, m, 2, 2), psi = testing::random_apsg(rng, m, 2, 2);
  GaussianMap gl(testing::random_unitary(rng, m)), gr(testing::random_unitary(rng, m));
  Observable ob;
  ob.terms.push_back({1.0, {{2, true}, {5, false}}});
  Estimate e1 = transition_rdm_element(gl, gr, phi, psi, {2, 5}, 0.1, 0.1, fixed(6));
  check_unbiased(e1, oracle_transition(ob, gl, gr, phi, psi));
  CHECK(e1.bias < 1e-6);
  for (auto idx : std::vector<std::array<int, 4>>{{1, 4, 6, 3}, {0, 2, 2, 7}, {3, 3, 5, 5}, {1, 6, 1, 2}}) {
    Estimate e2 = transition_rdm_element(gl, gr, phi, psi, {idx[0], idx[1], idx[2], idx[3]}, 0.1, 0.1, fixed(7));
    check_unbiased(e2, oracle_transition(two_body(idx[0], idx[1], idx[2], idx[3]), gl, gr, phi, psi));
  }
}

TEST_CASE("sum-of-squares Hamiltonian element") {
  std::mt19937_64 rng(37);
  const int m = 4;
  // Two-site Hubbard model: hopping plus U n_up n_dn written with squared factors.
  LatticeSpec lat = LatticeSpec::open_square(2, 1);
  SumOfSquares h;
  h.e0 = 0.3;
  h.h1 = hopping_matrix(lat, 1.0);
  for (int site = 0; site < 2; ++site) {
    MatrixXcd l = MatrixXcd::Zero(m, m);
    l(site, site) = 1.0;
    l(site + 2, site + 2) = 1.0;
    h.factors.push_back(l);
    h.lambdas.push_back(2.0);
    h.h1(site, site) -= 2.0;
    h.h1(site + 2, site + 2) -= 2.0;
  }
  ApsgState psi(m, {{{0, 3, 2, 1}, {cd(1 / std::sqrt(2.0)), cd(1 / std::sqrt(2.0))}}});
  GaussianMap gl(testing::random_unitary(rng, m)), gr(testing::random_unitary(rng, m));
  Observable full = Observable::one_body(h.h1);
  for (std::size_t l = 0; l < h.factors.size(); ++l) {
    Observable o1 = Observable::one_body(h.factors[l]);
    for (const auto& a : o1.terms)
      for (const auto& b : o1.terms) {
        auto ops = a.ops;
        ops.insert(ops.end(), b.ops.begin(), b.ops.end());
        full.terms.push_back({0.5 * h.lambdas[l] * a.coef * b.coef, ops});
      }
  }
  full.diagonal = [&](std::uint64_t) { return cd(h.e0); };
  Estimate e = hamiltonian_transition_element(gl, gr, psi, psi, h, 0.1, 0.1, fixed(8));
  check_unbiased(e, oracle_transition(full, gl, gr, psi, psi));
}

TEST_CASE("orbital gradient matches a finite-difference energy") {
  std::mt19937_64 rng(41);
  const int m = 4;
  LatticeSpec lat = LatticeSpec::open_square(2, 1);
  SumOfSquares h;
  h.h1 = hopping_matrix(lat, 1.0);
  MatrixXcd l = MatrixXcd::Zero(m, m);
  l(0, 0) = 1.0;
  l(2, 2) = 1.0;
  h.factors.push_back(l);
  h.lambdas.push_back(1.5);
  ApsgState psi(m, {{{0, 3, 2, 1}, {cd(0.6), cd(0.8)}}});
  GaussianMap u(testing::random_unitary(rng, m));
  Observable full = Observable::one_body(h.h1);
  Observable o1 = Observable::one_body(l);
  for (const auto& a : o1.terms)
    for (const auto& b : o1.terms) {
      auto ops = a.ops;
      ops.insert(ops.end(), b.ops.begin(), b.ops.end());
      full.terms.push_back({0.75 * a.coef * b.coef, ops});
    }
  // E(k) = <psi|U^dag e^{-K} H e^{K} U|psi> with e^{K} the map exp(k (E_pq - E_qp)).
  const int p = 0, q = 1;
  auto energy = [&](double k) {
    MatrixXcd gen = MatrixXcd::Zero(m, m);
    gen(p, q) = k;
    gen(q, p) = -k;
    GaussianMap rot(expm(gen) * u.matrix());
    return oracle_expectation(full, rot, psi).real();
  };
  double fd = (energy(1e-5) - energy(-1e-5)) / 2e-5;
  Estimate e = orbital_gradient(u, psi, h, p, q, 0.1, 0.1, fixed(9));
  INFO("fd " << fd << " est " << e.value << " se " << e.std_error);
  CHECK(std::abs(e.value.real() - fd) <= 4.0 * e.std_error + 1e-6);
}

TEST_CASE("Wilson loop") {
  for (int q = 0; q <= 2; ++q) CHECK(std::abs(charge_phase_value(q) - cd(q == 2 ? 0.0 : 1.0)) < 1e-14);
  std::mt19937_64 rng(43);
  LatticeSpec lat = LatticeSpec::open_square(2, 2);
  ApsgState psi(8, {{{0, 5, 4, 1}, {cd(1 / std::sqrt(2.0)), cd(1 / std::sqrt(2.0))}},
                    {{2, 7, 6, 3}, {cd(1 / std::sqrt(2.0)), cd(1 / std::sqrt(2.0))}}});
  GaussianMap u = hopping_evolution(lat, 1.0, 0.7);
  std::vector<int> c{0, 1, 3, 2};
  Observable w = Observable::from_diagonal([&](std::uint64_t b) {
    for (int j : c)
      if ((b >> j & 1U) && (b >> (j + 4) & 1U)) return cd(0.0);
    return cd(1.0);
  });
  cd ref = oracle_expectation(w, u, psi);
  CHECK(std::abs(wilson_loop_enumerated(u, psi, c) - ref) < 1e-10);
  check_unbiased(estimate_wilson_loop(u, psi, c, 0.1, 0.1, fixed(10)), ref);
  CHECK_THROWS_AS(estimate_wilson_loop(u, psi, {0, 0}, 0.1, 0.1, fixed(1)), ValidationError);
}

TEST_CASE("HS parity and extent") {
  LatticeSpec lat = LatticeSpec::open_square(2, 1);
  ApsgState psi(4, {{{0, 3, 2, 1}, {cd(1 / std::sqrt(2.0)), cd(1 / std::sqrt(2.0))}}});
  // The auxiliary-field identity on one site.
  const double W = 4.0, dt = 0.25;
  cd lam = hirsch_lambda(W, dt);
  CHECK(std::abs(std::cosh(lam) - std::polar(1.0, W * dt / 2)) < 1e-12);
  for (int nu = 0; nu < 2; ++nu)
    for (int nd = 0; nd < 2; ++nd) {
      cd lhs = std::polar(1.0, -dt * W / 4) * 0.5 *
               (std::exp(lam * double(nu - nd)) + std::exp(-lam * double(nu - nd)));
      cd rhs = std::polar(1.0, -dt * W * (nu - 0.5) * (nd - 0.5));
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  std::vector<int> t{0, 2};
  double ref = oracle_hs_parity(lat, 1.0, W, dt, 2, psi, t);
  check_unbiased(estimate_hs_parity(lat, 1.0, W, dt, 2, psi, t, 0.1, 0.1, fixed(11)), ref);
  // W = 0 is unitary evolution.
  double ref0 = oracle_hs_parity(lat, 1.0, 0.0, dt, 2, psi, t);
  GaussianMap u = hopping_evolution(lat, 1.0, 0.5);
  CHECK(std::abs(ref0 - oracle_expectation(Observable::parity(t), u, psi).real()) < 1e-12);

  std::mt19937_64 rng(47);
  std::vector<CircuitElement> circ{CircuitElement::layer(GaussianMap(testing::random_unitary(rng, 4))),
                                   CircuitElement::gate(0, 2, kPi / 8),
                                   CircuitElement::layer(GaussianMap(testing::random_unitary(rng, 4)))};
  check_unbiased(estimate_extent_overlap(circ, psi, psi, 0.1, 0.1, fixed(12)), oracle_circuit_overlap(circ, psi, psi));
  CHECK_THROWS_AS(estimate_extent_overlap({CircuitElement::gate(0, 1, 2.0)}, psi, psi, 0.1, 0.1, fixed(1)),
                  ValidationError);
}
