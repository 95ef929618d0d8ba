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

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "fock.hpp"
#include "linalg.hpp"

namespace pfmc {

inline constexpr double kNormTolerance = 1e-10;

// One geminal eta^dag = sum_j w_j c^dag_{a_j} c^dag_{b_j}. Slot j uses the
// global modes (modes[2j], modes[2j+1]) in that creation order.
struct ApsgBlock {
  std::vector<int> modes;
  std::vector<cd> weights;

  int num_slots() const { return static_cast<int>(weights.size()); }
  int first(int j) const { return modes[2 * j]; }
  int second(int j) const { return modes[2 * j + 1]; }
  double gamma() const;  // max_j |w_j|
};

// Product of blocks over disjoint mode sets, created in block order.
class ApsgState {
 public:
  ApsgState() = default;
  ApsgState(int num_modes, std::vector<ApsgBlock> blocks);

  int num_modes() const { return num_modes_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int particle_number() const { return 2 * num_blocks(); }
  const std::vector<ApsgBlock>& blocks() const { return blocks_; }
  const ApsgBlock& block(int t) const { return blocks_[t]; }
  double gamma() const;
  // Number of slot patterns, saturating at 2^62.
  std::uint64_t num_patterns() const;

  bool operator==(const ApsgState& other) const;

 private:
  int num_modes_ = 0;
  std::vector<ApsgBlock> blocks_;
};

// N four-mode blocks with two equal-weight slots each, M = 4N.
ApsgState psi4_product(int n);

// Sign of the permutation sorting a creation sequence into ascending order.
double sort_sign(const std::vector<int>& seq);

StateVector apsg_to_statevector(const ApsgState& psi);

// Exact <x|G|psi> by enumerating slot patterns (capped at 2^20).
cd oracle_amplitude(const MatrixXcd& g, const ApsgState& psi, const FockState& x);

ApsgState apsg_from_json(const nlohmann::json& j);
nlohmann::json apsg_to_json(const ApsgState& psi);

}  // namespace pfmc
