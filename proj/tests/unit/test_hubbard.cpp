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

#include "doctest.h"
#include "errors.hpp"
#include "hubbard.hpp"
#include "oracles.hpp"

using namespace pfmc;

namespace {

QuenchConfig chain2() {
  QuenchConfig c;
  c.lattice = LatticeSpec::open_square(2, 1);
  c.dimers = {{0, 1}};
  c.czz_pairs = {{0, 1}};
  c.times = {0.0};
  return c;
}

// 2x3 sites: dimers (0,1) and (3,4), a doublon at 2 and a holon at 5.
QuenchConfig lattice23() {
  QuenchConfig c;
  c.lattice = LatticeSpec::open_square(3, 2);
  c.dimers = {{0, 1}, {3, 4}};
  c.doublons = {2};
  c.holons = {5};
  c.czz_pairs = {{0, 1}, {1, 4}};
  c.wilson_contours = {{0, 1, 4, 3}};
  c.times = {0.0, 0.5, 1.0};
  return c;
}

void check_rows(const std::vector<QuenchRow>& mc, const std::vector<QuenchRow>& ref) {
  REQUIRE(mc.size() == ref.size());
  for (std::size_t k = 0; k < mc.size(); ++k) {
    INFO(mc[k].observable << " " << mc[k].params << " t=" << mc[k].t << " mc " << mc[k].estimate.value << " ref "
                          << ref[k].estimate.value << " se " << mc[k].estimate.std_error);
    CHECK(mc[k].observable == ref[k].observable);
    CHECK(std::abs(mc[k].estimate.value - ref[k].estimate.value) <= 4 * mc[k].estimate.std_error + 1e-12);
  }
}

}  // namespace

TEST_CASE("initial triplet state") {
  QuenchConfig c = chain2();
  StateVector v = apsg_to_statevector(build_initial_state(c));
  // (c_{0 up}^dag c_{1 dn}^dag + c_{0 dn}^dag c_{1 up}^dag)|0> with modes up = site, dn = 2 + site.
  StateVector vac(4);
  vac[0] = 1.0;
  StateVector ref = apply_ladders(vac, {{0, true}, {3, true}});
  StateVector second = apply_ladders(vac, {{2, true}, {1, true}});
  for (std::uint64_t b = 0; b < v.size(); ++b) CHECK(std::abs(v[b] - (ref[b] + second[b]) / std::sqrt(2.0)) < 1e-14);

  QuenchConfig d;
  d.lattice = LatticeSpec::open_square(1, 1);
  d.doublons = {0};
  StateVector vd = apsg_to_statevector(build_initial_state(d));
  CHECK(std::abs(vd[0b11] - 1.0) < 1e-14);

  QuenchConfig q = lattice23();
  CHECK(build_initial_state(q).particle_number() == 2 * 2 + 2);
}

TEST_CASE("quench config validation") {
  QuenchConfig c = chain2();
  c.holons = {1};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = chain2();
  c.czz_pairs = {{1, 1}};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  QuenchConfig e = lattice23();
  e.dimers = {{0, 4}, {1, 3}};
  CHECK_THROWS_WITH_AS(e.validate(), doctest::Contains("not a lattice link"), ValidationError);
  e = lattice23();
  e.holons = {};
  CHECK_THROWS_WITH_AS(e.validate(), doctest::Contains("not covered"), ValidationError);
  nlohmann::json j = quench_to_json(lattice23());
  CHECK(quench_to_json(quench_from_json(j)) == j);
  j.erase("lattice");
  CHECK_THROWS_AS(quench_from_json(j), ValidationError);
}

TEST_CASE("t = 0 diagnostics") {
  QuenchConfig c = chain2();
  auto ref = oracle_quench_suite(c);
  REQUIRE(ref.size() == 3);
  CHECK(ref[0].estimate.value.real() == doctest::Approx(0.0));
  // A triplet T0 has Sz_i Sz_j = -1/4 on both components.
  CHECK(ref[1].estimate.value.real() == doctest::Approx(-1.0));
  CHECK(ref[2].estimate.value.real() == doctest::Approx(-1.0));
  SamplingOptions o;
  o.seed = 1;
  CHECK(std::abs(spin_correlator_czz(c, 0, 1, 0.0, 0.05, 0.05, o).value + 1.0) < 0.05);
  CHECK(std::abs(doublon_number(c, 0.0, 0.05, 0.05, o).value) < 0.05);

  QuenchConfig q = lattice23();
  CHECK(std::abs(doublon_number(q, 0.0, 0.05, 0.05, o).value - 1.0) < 0.05);
  CHECK(std::abs(spin_correlator_czz(q, 0, 4, 0.0, 0.05, 0.05, o).value) < 0.05);

  QuenchConfig empty;
  empty.lattice = LatticeSpec::open_square(2, 1);
  empty.holons = {0, 1};
  CHECK(std::abs(triplet_density(empty, 0.3, 0.05, 0.05, o).value) < 0.05);
}

TEST_CASE("noninteracting quench suite matches the oracle") {
  QuenchConfig q = lattice23();
  SamplingOptions o;
  o.seed = 7;
  o.fixed_samples = 40000;
  check_rows(run_quench_suite(q, 0.1, 0.1, o), oracle_quench_suite(q));
}

TEST_CASE("interacting quench on two sites") {
  QuenchConfig c = chain2();
  c.W = 2.0;
  c.trotter_k = 2;
  c.times = {0.6};
  SamplingOptions o;
  o.seed = 9;
  o.fixed_samples = 40000;
  check_rows(run_quench_suite(c, 0.1, 0.1, o), oracle_quench_suite(c));
}

TEST_CASE("sample-complexity formulas") {
  CHECK(wilson_sample_complexity(22, 0.1, 0.1).calibrated == doctest::Approx(1e3));
  CHECK(wilson_sample_complexity(54, 0.1, 0.1).calibrated == doctest::Approx(1e7).epsilon(0.05));
  CHECK_THROWS_AS(wilson_sample_complexity(0, 0.1, 0.1), ValidationError);
  ComplexityEnvelope z = hs_complexity_envelope(0.0, 2.0, 0.5, 16, 8, 1.0, 0.01, 0.01);
  CHECK(z.a == 0.0);
  CHECK(z.B_typ == 1.0);
  CHECK(z.B_worst == 1.0);
  CHECK(z.K_typ == 105967.0);
  CHECK_THROWS_AS(hs_complexity_envelope(1.0, 1.0, 0.0, 4, 1, 1.0, 0.1, 0.1), ValidationError);
  double prev_w = 0.0, prev_t = 0.0;
  for (double w = 0.5; w <= 4.0; w += 0.5) {
    ComplexityEnvelope e = hs_complexity_envelope(w, 2.0, 0.5, 16, 8, 1.0, 0.01, 0.01);
    CHECK(e.B_worst > prev_w);
    prev_w = e.B_worst;
  }
  for (double t = 0.5; t <= 2.0; t += 0.25) {
    ComplexityEnvelope e = hs_complexity_envelope(4.0, t, t / 4, 16, 8, 1.0, 0.01, 0.01);
    CHECK(e.B_typ > prev_t);
    prev_t = e.B_typ;
  }
}
