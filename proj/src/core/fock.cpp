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

#include "fock.hpp"

#include <cmath>
#include <unordered_map>

#include "errors.hpp"

namespace pfmc {

FockState::FockState(int num_modes, std::uint64_t bits) : num_modes_(num_modes), bits_(bits) {
  if (num_modes < 0 || num_modes > 64) throw ValidationError("FockState: num_modes must be in [0, 64]");
  if (num_modes < 64 && (bits >> num_modes) != 0) throw ValidationError("FockState: occupation outside mode range");
}

FockState FockState::from_occupations(const std::vector<int>& occ) {
  if (occ.size() > 64) throw ValidationError("FockState: at most 64 modes");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] != 0 && occ[i] != 1) throw ValidationError("FockState: occupations must be 0 or 1");
    if (occ[i]) bits |= std::uint64_t{1} << i;
  }
  return FockState(static_cast<int>(occ.size()), bits);
}

FockState FockState::from_string(const std::string& s) {
  std::vector<int> occ;
  for (char c : s) {
    if (c == '0' || c == '1') occ.push_back(c - '0');
    else if (c == '|' || c == '>' || c == ' ') continue;
    else throw ValidationError("FockState: bad character in occupation string '" + s + "'");
  }
  return from_occupations(occ);
}

int FockState::particle_number() const { return __builtin_popcountll(bits_); }

std::vector<int> FockState::occupied() const {
  std::vector<int> out;
  for (int i = 0; i < num_modes_; ++i)
    if (bits_ >> i & 1U) out.push_back(i);
  return out;
}

std::string FockState::to_string() const {
  std::string s;
  for (int i = 0; i < num_modes_; ++i) s.push_back((bits_ >> i & 1U) ? '1' : '0');
  return s;
}

StateVector::StateVector(int num_modes) : num_modes_(num_modes) {
  if (num_modes < 0 || num_modes > kMaxModes)
    throw CapacityError("statevector limited to " + std::to_string(kMaxModes) + " modes, got " +
                        std::to_string(num_modes));
  amp_.assign(std::size_t{1} << num_modes, cd(0.0));
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

cd StateVector::inner(const StateVector& ket) const {
  if (ket.num_modes_ != num_modes_) throw ValidationError("inner product of statevectors with different mode counts");
  cd s(0.0);
  for (std::size_t i = 0; i < amp_.size(); ++i) s += std::conj(amp_[i]) * ket.amp_[i];
  return s;
}

StateVector apply_ladders(const StateVector& v, const std::vector<Ladder>& ops) {
  StateVector cur = v;
  const int m = v.num_modes();
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    if (it->mode < 0 || it->mode >= m) throw ValidationError("ladder operator mode out of range");
    StateVector next(m);
    const std::uint64_t bit = std::uint64_t{1} << it->mode;
    for (std::uint64_t b = 0; b < cur.size(); ++b) {
      if (cur[b] == cd(0.0)) continue;
      bool occ = b & bit;
      if (occ == it->dagger) continue;
      next[b ^ bit] += creation_sign(b, it->mode) * cur[b];
    }
    cur = std::move(next);
  }
  return cur;
}

StateVector apply_single_particle_map(const MatrixXcd& g, const StateVector& v) {
  const int m = v.num_modes();
  if (g.rows() != m || g.cols() != m) throw ValidationError("map dimension does not match statevector");
  StateVector out(m);
  for (std::uint64_t b = 0; b < v.size(); ++b) {
    if (v[b] == cd(0.0)) continue;
    // |b> = c^dag_{s1} ... c^dag_{sk}|0>; apply the transformed creators from the right.
    std::unordered_map<std::uint64_t, cd> cur{{0U, v[b]}};
    for (int j = m - 1; j >= 0; --j) {
      if (!(b >> j & 1U)) continue;
      std::unordered_map<std::uint64_t, cd> next;
      for (const auto& [bits, c] : cur) {
        for (int i = 0; i < m; ++i) {
          if (bits >> i & 1U) continue;
          if (g(i, j) == cd(0.0)) continue;
          next[bits | (std::uint64_t{1} << i)] += creation_sign(bits, i) * g(i, j) * c;
        }
      }
      cur = std::move(next);
    }
    for (const auto& [bits, c] : cur) out[bits] += c;
  }
  return out;
}

}  // namespace pfmc
