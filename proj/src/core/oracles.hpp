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

#pragma once

#include <functional>
#include <vector>

#include "apsg.hpp"
#include "fock.hpp"
#include "gaussian_map.hpp"

namespace pfmc {

// Observable given as a sum of ladder-operator products plus an optional
// function diagonal in the occupation basis.
struct Observable {
  struct Term {
    cd coef;
    std::vector<Ladder> ops;
  };
  std::vector<Term> terms;
  std::function<cd(std::uint64_t)> diagonal;

  StateVector apply(const StateVector& v) const;

  static Observable parity(const std::vector<int>& modes);
  static Observable number_product(const std::vector<int>& modes);
  static Observable one_body(const MatrixXcd& k);  // sum_pq K_pq c^dag_p c_q
  static Observable from_diagonal(std::function<cd(std::uint64_t)> f);
};

// Exact <Phi| G_l^dag O G_r |Psi> on the dense Fock space (M <= 16).
cd oracle_transition(const Observable& obs, const GaussianMap& left, const GaussianMap& right,
                     const ApsgState& phi, const ApsgState& psi);

// Exact <Psi| G^dag O G |Psi>.
cd oracle_expectation(const Observable& obs, const GaussianMap& g, const ApsgState& psi);

inline constexpr int kOracleMaxModes = 16;

}  // namespace pfmc
