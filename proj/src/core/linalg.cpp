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

#include "linalg.hpp"

#include <cmath>

namespace pfmc {

double op_norm(const MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXcd> svd(a);
  return svd.singularValues()(0);
}

double trace_norm(const MatrixXcd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXcd> svd(a);
  return svd.singularValues().sum();
}

MatrixXcd expm_hermitian(const MatrixXcd& h, cd s) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  VectorXcd d(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) d(i) = std::exp(s * es.eigenvalues()(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

MatrixXcd expm(const MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  MatrixXcd x = a / std::pow(2.0, squarings);
  MatrixXcd result = MatrixXcd::Identity(n, n);
  MatrixXcd term = MatrixXcd::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = term * x / static_cast<double>(k);
    result += term;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace pfmc
