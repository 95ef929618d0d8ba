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

inline constexpr double kDefaultSourceStep = 1e-4;

// <Phi|G_l^dag c^dag_p c_q G_r|Psi> for (p,q), or
// <Phi|G_l^dag c^dag_p c^dag_q c_s c_r G_r|Psi> for (p,q,r,s).
Estimate transition_rdm_element(const GaussianMap& left, const GaussianMap& right, const ApsgState& phi,
                                const ApsgState& psi, const std::vector<int>& indices, double eps, double delta,
                                const SamplingOptions& opt, double step = kDefaultSourceStep);

// H = E0 + c^dag h1 c + 1/2 sum_l lambda_l (c^dag L_l c)^2 with Hermitian h1, L_l.
struct SumOfSquares {
  double e0 = 0.0;
  MatrixXcd h1;
  std::vector<double> lambdas;
  std::vector<MatrixXcd> factors;

  void validate(int num_modes) const;
};

Estimate hamiltonian_transition_element(const GaussianMap& left, const GaussianMap& right, const ApsgState& phi,
                                        const ApsgState& psi, const SumOfSquares& h, double eps, double delta,
                                        const SamplingOptions& opt, double step = kDefaultSourceStep);

// <Psi|U^dag [H, c^dag_p c_q - c^dag_q c_p] U|Psi> from 1- and 2-RDM elements.
Estimate orbital_gradient(const GaussianMap& u, const ApsgState& psi, const SumOfSquares& h, int p, int q,
                          double eps, double delta, const SamplingOptions& opt, double step = kDefaultSourceStep);

// min_c (2N|c| + ||K - c I||_*) for Hermitian K.
double source_norm_bound(const MatrixXcd& k, int n_pairs);

}  // namespace pfmc
