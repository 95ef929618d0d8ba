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

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace pfmc {

using cd = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Largest singular value.
double op_norm(const MatrixXcd& a);

// Matrix exponential of a Hermitian matrix times a scalar: exp(s * h).
MatrixXcd expm_hermitian(const MatrixXcd& h, cd s);

// General matrix exponential (scaling and squaring with Taylor terms).
MatrixXcd expm(const MatrixXcd& a);

// Trace norm.
double trace_norm(const MatrixXcd& a);

}  // namespace pfmc
