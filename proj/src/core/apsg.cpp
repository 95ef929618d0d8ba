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

#include "apsg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace pfmc {

double ApsgBlock::gamma() const {
  double g = 0.0;
  for (const auto& w : weights) g = std::max(g, std::abs(w));
  return g;
}

ApsgState::ApsgState(int num_modes, std::vector<ApsgBlock> blocks)
    : num_modes_(num_modes), blocks_(std::move(blocks)) {
  if (num_modes < 0 || num_modes > 64) throw ValidationError("APSG: num_modes must be in [0, 64]");
  std::vector<int> owner(num_modes, -1);
  for (std::size_t t = 0; t < blocks_.size(); ++t) {
    const auto& b = blocks_[t];
    std::ostringstream where;
    where << "APSG block " << t << ": ";
    if (b.modes.empty() || b.modes.size() % 2 != 0)
      throw ValidationError(where.str() + "mode list must be non-empty with even length");
    if (b.weights.size() * 2 != b.modes.size())
      throw ValidationError(where.str() + "need one weight per slot (mode pair)");
    for (int m : b.modes) {
      if (m < 0 || m >= num_modes) throw ValidationError(where.str() + "mode " + std::to_string(m) + " out of range");
      if (owner[m] != -1) throw ValidationError(where.str() + "mode " + std::to_string(m) + " is used twice");
      owner[m] = static_cast<int>(t);
    }
    double norm2 = 0.0;
    for (const auto& w : b.weights) norm2 += std::norm(w);
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
      where << "sum of |w|^2 is " << norm2 << ", expected 1";
      throw ValidationError(where.str());
    }
  }
}

double ApsgState::gamma() const {
  double g = 1.0;
  for (const auto& b : blocks_) g *= b.gamma();
  return g;
}

std::uint64_t ApsgState::num_patterns() const {
  std::uint64_t n = 1;
  for (const auto& b : blocks_) {
    n *= static_cast<std::uint64_t>(b.num_slots());
    if (n > (std::uint64_t{1} << 62)) return std::uint64_t{1} << 62;
  }
  return n;
}

bool ApsgState::operator==(const ApsgState& other) const {
  if (num_modes_ != other.num_modes_ || blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t t = 0; t < blocks_.size(); ++t)
    if (blocks_[t].modes != other.blocks_[t].modes || blocks_[t].weights != other.blocks_[t].weights) return false;
  return true;
}

ApsgState psi4_product(int n) {
  if (n < 0) throw ValidationError("psi4_product: N must be non-negative");
  if (4 * n > 64) throw CapacityError("psi4_product: more than 64 modes");
  std::vector<ApsgBlock> blocks;
  const double w = 1.0 / std::sqrt(2.0);
  for (int t = 0; t < n; ++t) blocks.push_back({{4 * t, 4 * t + 1, 4 * t + 2, 4 * t + 3}, {cd(w), cd(w)}});
  return ApsgState(4 * n, std::move(blocks));
}

double sort_sign(const std::vector<int>& seq) {
  int inversions = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
      if (seq[i] > seq[j]) ++inversions;
  return (inversions % 2) ? -1.0 : 1.0;
}

namespace {

constexpr std::uint64_t kPatternCap = std::uint64_t{1} << 20;

// Calls f(slot choice per block) for every slot pattern.
template <typename F>
void for_each_pattern(const ApsgState& psi, F&& f) {
  const int n = psi.num_blocks();
  std::vector<int> choice(n, 0);
  while (true) {
    f(choice);
    int t = n - 1;
    while (t >= 0 && ++choice[t] == psi.block(t).num_slots()) choice[t--] = 0;
    if (t < 0) return;
  }
}

}  // namespace

StateVector apsg_to_statevector(const ApsgState& psi) {
  StateVector v(psi.num_modes());
  if (psi.num_patterns() > kPatternCap) throw CapacityError("apsg_to_statevector: more than 2^20 slot patterns");
  for_each_pattern(psi, [&](const std::vector<int>& choice) {
    std::vector<int> seq;
    cd amp(1.0);
    std::uint64_t bits = 0;
    for (int t = 0; t < psi.num_blocks(); ++t) {
      const auto& b = psi.block(t);
      seq.push_back(b.first(choice[t]));
      seq.push_back(b.second(choice[t]));
      amp *= b.weights[choice[t]];
      bits |= (std::uint64_t{1} << b.first(choice[t])) | (std::uint64_t{1} << b.second(choice[t]));
    }
    v[bits] += sort_sign(seq) * amp;
  });
  return v;
}

cd oracle_amplitude(const MatrixXcd& g, const ApsgState& psi, const FockState& x) {
  const int m = psi.num_modes();
  if (g.rows() != m || g.cols() != m) throw ValidationError("oracle_amplitude: map dimension mismatch");
  if (x.num_modes() != m) throw ValidationError("oracle_amplitude: Fock state has wrong number of modes");
  if (x.particle_number() != psi.particle_number()) return cd(0.0);
  if (psi.num_patterns() > kPatternCap) throw CapacityError("oracle_amplitude: more than 2^20 slot patterns");
  const auto rows = x.occupied();
  const int k = static_cast<int>(rows.size());
  cd total(0.0);
  MatrixXcd sub(k, k);
  for_each_pattern(psi, [&](const std::vector<int>& choice) {
    std::vector<int> seq;
    cd amp(1.0);
    for (int t = 0; t < psi.num_blocks(); ++t) {
      const auto& b = psi.block(t);
      seq.push_back(b.first(choice[t]));
      seq.push_back(b.second(choice[t]));
      amp *= b.weights[choice[t]];
    }
    double sign = sort_sign(seq);
    std::sort(seq.begin(), seq.end());
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) sub(r, c) = g(rows[r], seq[c]);
    total += sign * amp * (k == 0 ? cd(1.0) : sub.determinant());
  });
  return total;
}

ApsgState apsg_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ValidationError("APSG state must be a JSON object");
    int m = j.at("num_modes").get<int>();
    std::vector<ApsgBlock> blocks;
    for (const auto& jb : j.at("blocks")) {
      ApsgBlock b;
      b.modes = jb.at("modes").get<std::vector<int>>();
      for (const auto& w : jb.at("weights")) {
        if (w.is_number()) b.weights.emplace_back(w.get<double>(), 0.0);
        else if (w.is_array() && w.size() == 2) b.weights.emplace_back(w[0].get<double>(), w[1].get<double>());
        else throw ValidationError("APSG weight must be a number or [re, im]");
      }
      blocks.push_back(std::move(b));
    }
    return ApsgState(m, std::move(blocks));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("APSG JSON: ") + e.what());
  }
}

nlohmann::json apsg_to_json(const ApsgState& psi) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : psi.blocks()) {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& x : b.weights) w.push_back({x.real(), x.imag()});
    blocks.push_back({{"modes", b.modes}, {"weights", w}});
  }
  return {{"num_modes", psi.num_modes()}, {"blocks", blocks}};
}

}  // namespace pfmc
