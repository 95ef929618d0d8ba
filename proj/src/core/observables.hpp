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

#include <vector>

#include "overlap.hpp"

namespace pfmc {

// Unbiased for <Phi| prop_l^dag (prod_{i in S} n_i) prop_r |Psi> via random
// parity strings T subset of S weighted by (-1)^{|T|}.
Estimate estimate_correlator(const Propagation& prop, const ApsgState& phi, const ApsgState& psi,
                             const std::vector<int>& modes, double eps, double delta, const SamplingOptions& opt,
                             const BoundOverride* override_bounds = nullptr);

Estimate estimate_transition_correlator(const GaussianMap& left, const GaussianMap& right, const ApsgState& phi,
                                        const ApsgState& psi, const std::vector<int>& modes, double eps,
                                        double delta, const SamplingOptions& opt);

// Probability that the modes S of U|psi> read the bit pattern a.
Estimate estimate_marginal(const GaussianMap& u, const ApsgState& psi, const std::vector<int>& modes,
                           const std::vector<int>& pattern, double eps, double delta, const SamplingOptions& opt);

struct BinnedDistribution {
  std::vector<double> probabilities;  // G(Omega), Omega = 0..Omega_max
  std::vector<Estimate> coefficients; // estimated G~(k), k = 0..floor(Omega_max/2)
  double epsilon = 0.0;               // per-bin error
  double delta = 0.0;
  std::int64_t samples = 0;
};

inline constexpr int kMaxBinnedOmega = 4096;

// Distribution of Omega = sum_i omega_i n_i from Fourier coefficients.
BinnedDistribution estimate_binned_distribution(const GaussianMap& u, const ApsgState& psi,
                                                const std::vector<int>& omega, double eps, double delta,
                                                const SamplingOptions& opt);

// Inverse DFT of coefficients G~(0..Omega_max).
std::vector<double> binned_from_coefficients(const std::vector<cd>& coefficients);

// (2/sqrt3) E_sigma[e^{-i sigma pi/6} e^{i sigma pi q/3}], equal to 1 - [q = 2].
cd charge_phase_value(int q);

// Sites of the contour; site j owns modes j and j + M/2.
void validate_contour(const std::vector<int>& contour, int num_modes);

// Doublon-free Wilson loop prod_{j in C}(1 - n_{j,up} n_{j,dn}).
Estimate estimate_wilson_loop(const Propagation& prop, const ApsgState& psi, const std::vector<int>& contour,
                              double eps, double delta, const SamplingOptions& opt,
                              const BoundOverride* override_bounds = nullptr);
Estimate estimate_wilson_loop(const GaussianMap& u, const ApsgState& psi, const std::vector<int>& contour,
                              double eps, double delta, const SamplingOptions& opt);

// Charge-phase decomposition summed over all sigma with exact inner overlaps.
cd wilson_loop_enumerated(const GaussianMap& u, const ApsgState& psi, const std::vector<int>& contour);

}  // namespace pfmc
