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

#include <cstdint>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace pfmc {

// Occupation-number basis state c^dag_{i1} ... c^dag_{ik}|0> with ascending
// indices. Modes are 0-based; bit i of `bits` is mode i.
class FockState {
 public:
  FockState() = default;
  FockState(int num_modes, std::uint64_t bits);
  static FockState from_occupations(const std::vector<int>& occ);
  static FockState from_string(const std::string& s);

  int num_modes() const { return num_modes_; }
  std::uint64_t bits() const { return bits_; }
  int particle_number() const;
  std::vector<int> occupied() const;
  std::string to_string() const;

 private:
  int num_modes_ = 0;
  std::uint64_t bits_ = 0;
};

// Sign of c^dag_j acting on basis bits: (-1)^{# occupied modes below j}.
inline double creation_sign(std::uint64_t bits, int j) {
  std::uint64_t below = bits & ((std::uint64_t{1} << j) - 1U);
  return (__builtin_popcountll(below) & 1) ? -1.0 : 1.0;
}

// Dense state over all 2^M occupation patterns.
class StateVector {
 public:
  static constexpr int kMaxModes = 20;

  explicit StateVector(int num_modes);
  int num_modes() const { return num_modes_; }
  std::size_t size() const { return amp_.size(); }
  cd& operator[](std::uint64_t bits) { return amp_[bits]; }
  const cd& operator[](std::uint64_t bits) const { return amp_[bits]; }
  double norm() const;
  cd inner(const StateVector& ket) const;  // <this|ket>

 private:
  int num_modes_;
  std::vector<cd> amp_;
};

struct Ladder {
  int mode;
  bool dagger;
};

// Applies a product of ladder operators; the rightmost acts first.
StateVector apply_ladders(const StateVector& v, const std::vector<Ladder>& ops);

// Second-quantized action of a single-particle matrix, built by expanding
// each creation operator c'^dag_j = sum_i G_ij c^dag_i in turn.
StateVector apply_single_particle_map(const MatrixXcd& g, const StateVector& v);

}  // namespace pfmc
