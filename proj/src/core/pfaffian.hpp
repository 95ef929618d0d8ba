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

#include "linalg.hpp"

namespace pfmc {

// Relative tolerance for accepting a matrix as skew-symmetric.
inline constexpr double kSkewTolerance = 1e-12;

// Checks A^T = -A up to kSkewTolerance relative to max|A_pq| and returns the
// symmetrized (A - A^T)/2. Throws ValidationError naming the worst pair.
MatrixXcd validate_skew(const MatrixXcd& a);

// Pfaffian of a skew-symmetric matrix. Odd dimension gives 0, empty gives 1.
cd pfaffian(const MatrixXcd& a);

// Unchecked in-place kernel on a column-major n x n buffer (destroyed).
// Parlett-Reid tridiagonalization with partial pivoting.
cd pfaffian_inplace(cd* a, int n);

// Returns X^T A X; pf of the result equals det(X) pf(A) for square X.
MatrixXcd congruence(const MatrixXcd& a, const MatrixXcd& x);

// Coefficient of y_1...y_N in pf(sum_t y_t B_t), by averaging over all sign
// vectors. N is capped at 24.
cd mixed_pfaffian_exact(const std::vector<MatrixXcd>& blocks);

// Same coefficient computed in an explicit exterior algebra. N is capped at 8.
cd wedge_top_coefficient_oracle(const std::vector<MatrixXcd>& blocks);

}  // namespace pfmc
