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

#include "apsg.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "oracles.hpp"
#include "overlap.hpp"
#include "test_util.hpp"

using namespace pfmc;

TEST_CASE("psi4 product amplitude on a slot pattern") {
  ApsgState psi = psi4_product(2);
  CHECK(psi.num_modes() == 8);
  CHECK(std::abs(psi.gamma() - 0.5) < 1e-15);
  auto x = FockState::from_string("11001100");
  cd amp = oracle_amplitude(MatrixXcd::Identity(8, 8), psi, x);
  CHECK(std::abs(amp - cd(0.5)) < 1e-14);
  CHECK(std::abs(apsg_to_statevector(psi).norm() - 1.0) < 1e-12);
}

TEST_CASE("weights must be normalized per block") {
  std::vector<ApsgBlock> blocks{{{0, 1, 2, 3}, {cd(1.0), cd(1.0)}}};
  CHECK_THROWS_AS(ApsgState(4, blocks), ValidationError);
  std::vector<ApsgBlock> overlap{{{0, 1}, {cd(1.0)}}, {{1, 2}, {cd(1.0)}}};
  CHECK_THROWS_AS(ApsgState(4, overlap), ValidationError);
}

TEST_CASE("oracle amplitude agrees with the second-quantized map action") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 6; ++rep) {
    int m = 8, n = 1 + rep % 3;
    ApsgState psi = testing::random_apsg(rng, m, n, 3);
    MatrixXcd g = testing::random_matrix(rng, m, m);
    StateVector v = apply_single_particle_map(g, apsg_to_statevector(psi));
    for (std::uint64_t bits = 0; bits < v.size(); ++bits) {
      if (__builtin_popcountll(bits) != 2 * n) continue;
      cd amp = oracle_amplitude(g, psi, FockState(m, bits));
      CHECK(std::abs(amp - v[bits]) <= 1e-10 * std::max(1.0, std::abs(amp)));
    }
  }
}

TEST_CASE("exact one-shot average reproduces amplitudes") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    int m = 10, n = 1 + rep % 4;
    ApsgState psi = testing::random_apsg(rng, m, n, 2);
    GaussianMap g(rep % 2 ? testing::random_unitary(rng, m) : testing::random_matrix(rng, m, m));
    std::vector<int> occ(m, 0);
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int i = 0; i < 2 * n; ++i) occ[idx[i]] = 1;
    FockState x = FockState::from_occupations(occ);
    cd avg = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<int> b(n);
      for (int t = 0; t < n; ++t) b[t] = (mask >> t & 1) ? -1 : 1;
      avg += one_shot_fock(g, psi, x, b);
    }
    avg *= psi.gamma() / double(1 << n);
    cd ref = oracle_amplitude(g.matrix(), psi, x);
    CHECK(std::abs(avg - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("exact APSG overlap agrees with statevector inner product") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 6; ++rep) {
    int m = 8, n = 2;
    ApsgState phi = testing::random_apsg(rng, m, n, 2);
    ApsgState psi = testing::random_apsg(rng, m, n, 3);
    GaussianMap g(testing::random_unitary(rng, m));
    cd ref = apsg_to_statevector(phi).inner(apply_single_particle_map(g.matrix(), apsg_to_statevector(psi)));
    CHECK(std::abs(exact_apsg_overlap(g, phi, psi) - ref) < 1e-10);
  }
}

TEST_CASE("particle number mismatch gives an exact zero") {
  ApsgState psi = psi4_product(1);
  auto x = FockState::from_string("1110");
  CHECK(one_shot_fock(GaussianMap::identity(4), psi, x, {1}) == cd(0.0));
}

TEST_CASE("sampled overlaps land near the exact value") {
  std::mt19937_64 rng(13);
  int m = 8;
  ApsgState phi = testing::random_apsg(rng, m, 2, 2);
  ApsgState psi = testing::random_apsg(rng, m, 2, 2);
  GaussianMap g(testing::random_unitary(rng, m));
  cd ref = exact_apsg_overlap(g, phi, psi);
  SamplingOptions opt;
  opt.seed = 99;
  opt.fixed_samples = 100000;
  Estimate e = estimate_apsg_overlap(g, phi, psi, 0.05, 0.05, opt);
  CHECK(std::abs(e.value - ref) <= 4.0 * e.std_error + 1e-12);
}
