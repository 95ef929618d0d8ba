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

#include <optional>
#include <vector>

#include "observables.hpp"

namespace pfmc {

enum class HsBudget {
  Worst,    // rigorous bound from ||G(sigma)|| <= e^{|a| n}
  Typical,  // heuristic scale B_typ; estimate flagged as not certified
};

// C_T e^{2|a| n r}.
double hs_worst_bound(cd lambda, double n_slices, int r, double c_t);
// exp(sqrt(2/pi) |a| L sqrt(t/dt)).
double hs_typical_bound(cd lambda, int sites, double t, double dt);

// mu_T = E[<Psi|G(sigma_L)^dag Pi_T G(sigma_R)|Psi>] over independent paths.
Estimate estimate_hs_parity(const LatticeSpec& lat, double J, double W, double dt, int n_slices,
                            const ApsgState& psi, const std::vector<int>& parity_modes, double eps, double delta,
                            const SamplingOptions& opt, HsBudget budget = HsBudget::Worst);

// Dense Strang-split evolution with the same slicing, then <Pi_T>.
double oracle_hs_parity(const LatticeSpec& lat, double J, double W, double dt, int n_slices, const ApsgState& psi,
                        const std::vector<int>& parity_modes);

// exp(-i dt W sum_j n_{j,up} n_{j,dn}) applied between half hops.
StateVector trotter_evolve(const LatticeSpec& lat, double J, double W, double dt, int n_slices, StateVector v);

// One element of a circuit: a Gaussian layer or exp(i theta Z_i Z_j).
struct CircuitElement {
  std::optional<GaussianMap> map;
  int i = 0, j = 0;
  double theta = 0.0;

  static CircuitElement layer(GaussianMap g) {
    CircuitElement e;
    e.map = std::move(g);
    return e;
  }
  static CircuitElement gate(int i, int j, double theta) {
    CircuitElement e;
    e.i = i;
    e.j = j;
    e.theta = theta;
    return e;
  }
};

// <Phi| U_circuit |Psi>, elements applied in list order.
Estimate estimate_extent_overlap(const std::vector<CircuitElement>& circuit, const ApsgState& phi,
                                 const ApsgState& psi, double eps, double delta, const SamplingOptions& opt);

cd oracle_circuit_overlap(const std::vector<CircuitElement>& circuit, const ApsgState& phi, const ApsgState& psi);

}  // namespace pfmc
