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

#include "pfaffian.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace pfmc {

MatrixXcd validate_skew(const MatrixXcd& a) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << "matrix must be square, got " << a.rows() << "x" << a.cols();
    throw ValidationError(os.str());
  }
  const Eigen::Index n = a.rows();
  double scale = n > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  double worst = 0.0;
  Eigen::Index wp = 0, wq = 0;
  for (Eigen::Index q = 0; q < n; ++q) {
    for (Eigen::Index p = 0; p <= q; ++p) {
      double v = std::abs(a(p, q) + a(q, p));
      if (v > worst) {
        worst = v;
        wp = p;
        wq = q;
      }
    }
  }
  if (worst > kSkewTolerance * scale) {
    std::ostringstream os;
    os << "matrix is not skew-symmetric: |A(" << wp << "," << wq << ") + A(" << wq << "," << wp
       << ")| = " << worst << " exceeds tolerance " << kSkewTolerance * scale;
    throw ValidationError(os.str());
  }
  return (a - a.transpose()) / 2.0;
}

cd pfaffian_inplace(cd* a, int n) {
  if (n == 0) return cd(1.0);
  if (n % 2 == 1) return cd(0.0);
  auto at = [a, n](int i, int j) -> cd& { return a[i + j * n]; };
  cd result(1.0);
  for (int k = 0; k < n - 1; k += 2) {
    int kp = k + 1;
    double best = std::abs(at(k + 1, k));
    for (int i = k + 2; i < n; ++i) {
      double v = std::abs(at(i, k));
      if (v > best) {
        best = v;
        kp = i;
      }
    }
    if (kp != k + 1) {
      for (int j = k; j < n; ++j) std::swap(at(k + 1, j), at(kp, j));
      for (int i = k; i < n; ++i) std::swap(at(i, k + 1), at(i, kp));
      result = -result;
    }
    cd piv = at(k, k + 1);
    if (piv == cd(0.0)) return cd(0.0);
    result *= piv;
    if (k + 2 < n) {
      // Rank-two update of the trailing block with tau = A(k, k+2:) / A(k, k+1).
      for (int j = k + 2; j < n; ++j) {
        cd tau_j = at(k, j) / piv;
        cd col_j = at(j, k + 1);
        for (int i = k + 2; i < n; ++i) {
          cd tau_i = at(k, i) / piv;
          at(i, j) += tau_i * col_j - at(i, k + 1) * tau_j;
        }
      }
    }
  }
  return result;
}

cd pfaffian(const MatrixXcd& a) {
  MatrixXcd s = validate_skew(a);
  return pfaffian_inplace(s.data(), static_cast<int>(s.rows()));
}

MatrixXcd congruence(const MatrixXcd& a, const MatrixXcd& x) {
  MatrixXcd s = validate_skew(a);
  if (x.rows() != s.rows()) throw ValidationError("congruence: X must have as many rows as A");
  return x.transpose() * s * x;
}

namespace {

std::vector<MatrixXcd> checked_blocks(const std::vector<MatrixXcd>& blocks) {
  std::vector<MatrixXcd> out;
  out.reserve(blocks.size());
  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(blocks.size());
  for (const auto& b : blocks) {
    if (b.rows() != dim || b.cols() != dim) {
      std::ostringstream os;
      os << "each block must be " << dim << "x" << dim;
      throw ValidationError(os.str());
    }
    out.push_back(validate_skew(b));
  }
  return out;
}

}  // namespace

cd mixed_pfaffian_exact(const std::vector<MatrixXcd>& blocks) {
  const std::size_t n = blocks.size();
  if (n > 24) throw CapacityError("mixed_pfaffian_exact: N = " + std::to_string(n) + " exceeds 24");
  auto bs = checked_blocks(blocks);
  if (n == 0) return cd(1.0);
  const int dim = static_cast<int>(2 * n);
  MatrixXcd sum(dim, dim);
  cd total(0.0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    sum.setZero();
    double sign = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (mask >> t & 1U) {
        sum -= bs[t];
        sign = -sign;
      } else {
        sum += bs[t];
      }
    }
    total += sign * pfaffian_inplace(sum.data(), dim);
  }
  return total / std::ldexp(1.0, static_cast<int>(n));
}

cd wedge_top_coefficient_oracle(const std::vector<MatrixXcd>& blocks) {
  const std::size_t n = blocks.size();
  if (n > 8) throw CapacityError("wedge_top_coefficient_oracle: N = " + std::to_string(n) + " exceeds 8");
  auto bs = checked_blocks(blocks);
  const int dim = static_cast<int>(2 * n);
  // Basis k-vectors e_S keyed by the bitmask of S, indices ascending.
  std::map<std::uint32_t, cd> form{{0U, cd(1.0)}};
  for (const auto& b : bs) {
    std::map<std::uint32_t, cd> next;
    for (const auto& [s, c] : form) {
      for (int p = 0; p < dim; ++p) {
        if (s >> p & 1U) continue;
        for (int q = p + 1; q < dim; ++q) {
          if (s >> q & 1U) continue;
          // e_S ^ e_p ^ e_q: count elements of S above p and above q.
          int swaps = std::popcount(s >> (p + 1)) + std::popcount(s >> (q + 1));
          double sign = (swaps % 2) ? -1.0 : 1.0;
          next[s | (1U << p) | (1U << q)] += sign * c * b(p, q);
        }
      }
    }
    form = std::move(next);
  }
  const std::uint32_t top = dim == 32 ? ~0U : ((1U << dim) - 1U);
  auto it = form.find(top);
  return it == form.end() ? cd(0.0) : it->second;
}

}  // namespace pfmc
