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

#include "oracles.hpp"

#include "errors.hpp"

namespace pfmc {

StateVector Observable::apply(const StateVector& v) const {
  StateVector out(v.num_modes());
  for (const auto& t : terms) {
    StateVector w = apply_ladders(v, t.ops);
    for (std::uint64_t b = 0; b < w.size(); ++b) out[b] += t.coef * w[b];
  }
  if (diagonal)
    for (std::uint64_t b = 0; b < v.size(); ++b)
      if (v[b] != cd(0.0)) out[b] += diagonal(b) * v[b];
  return out;
}

Observable Observable::parity(const std::vector<int>& modes) {
  std::uint64_t mask = 0;
  for (int m : modes) mask |= std::uint64_t{1} << m;
  return from_diagonal([mask](std::uint64_t b) { return cd((__builtin_popcountll(b & mask) & 1) ? -1.0 : 1.0); });
}

Observable Observable::number_product(const std::vector<int>& modes) {
  std::uint64_t mask = 0;
  for (int m : modes) mask |= std::uint64_t{1} << m;
  return from_diagonal([mask](std::uint64_t b) { return cd((b & mask) == mask ? 1.0 : 0.0); });
}

Observable Observable::one_body(const MatrixXcd& k) {
  Observable o;
  for (Eigen::Index p = 0; p < k.rows(); ++p)
    for (Eigen::Index q = 0; q < k.cols(); ++q)
      if (k(p, q) != cd(0.0))
        o.terms.push_back({k(p, q), {{static_cast<int>(p), true}, {static_cast<int>(q), false}}});
  return o;
}

Observable Observable::from_diagonal(std::function<cd(std::uint64_t)> f) {
  Observable o;
  o.diagonal = std::move(f);
  return o;
}

cd oracle_transition(const Observable& obs, const GaussianMap& left, const GaussianMap& right,
                     const ApsgState& phi, const ApsgState& psi) {
  const int m = psi.num_modes();
  if (m > kOracleMaxModes) throw CapacityError("oracle: more than 16 modes");
  if (phi.num_modes() != m || left.num_modes() != m || right.num_modes() != m)
    throw ValidationError("oracle: mode counts differ");
  StateVector bra = apply_single_particle_map(left.matrix(), apsg_to_statevector(phi));
  StateVector ket = apply_single_particle_map(right.matrix(), apsg_to_statevector(psi));
  return bra.inner(obs.apply(ket));
}

cd oracle_expectation(const Observable& obs, const GaussianMap& g, const ApsgState& psi) {
  return oracle_transition(obs, g, g, psi, psi);
}

}  // namespace pfmc
