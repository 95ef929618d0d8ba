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
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace pfmc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for an independent sub-stream, a pure function of (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Counter-based generator: the draws of sample k depend only on (seed, k),
// so results do not depend on how samples are spread over threads.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint64_t index);
  std::uint64_t next() { return splitmix64(state_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool bit() { return next() >> 63; }
  int sign() { return bit() ? -1 : 1; }

 private:
  std::uint64_t state_;
};

struct Estimate {
  cd value{0.0};
  double std_error = 0.0;
  std::int64_t samples = 0;
  double epsilon = 0.0;  // additive error guaranteed with probability 1 - delta
  double delta = 0.0;
  double bound = 0.0;    // bound B entering the sample budget
  std::string aggregation = "mean";
  bool certified = true;  // false when B is a heuristic proxy
  double bias = 0.0;      // finite-difference bias estimate, when relevant
  std::map<std::string, double> extras;
};

// ceil(2 B^2 ln(2/delta) / eps^2), as a double so huge budgets do not wrap.
double hoeffding_samples(double bound, double eps, double delta);

struct MomPlan {
  std::int64_t groups;
  std::int64_t group_size;
  std::int64_t total() const { return groups * group_size; }
};
// Median-of-means plan for a second-moment bound E|X|^2 <= B^2.
MomPlan mom_plan(double bound, double eps, double delta, bool real_target);

// Coordinatewise median of contiguous group means.
cd median_of_means(const std::vector<cd>& samples, int groups);

struct SamplingOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::int64_t fixed_samples = 0;  // 0 selects the certified budget
  double max_samples = 1e10;
};

// Description of an unbiased one-shot estimator.
struct Sampler {
  // Called once per worker thread; the returned closure owns its scratch.
  std::function<std::function<cd(SampleRng&)>()> make_worker;
  double pointwise_bound = std::numeric_limits<double>::infinity();  // sup |X|
  double moment_bound = std::numeric_limits<double>::infinity();     // sqrt(E|X|^2) bound
  bool real_target = false;  // estimate Re X only
  bool certified = true;
};

// Runs the sampler with the cheaper of a Hoeffding or median-of-means budget
// reaching absolute error eps with probability 1 - delta.
Estimate run_sampler(const Sampler& s, double eps, double delta, const SamplingOptions& opt);

// Worker count from an explicit request, else PFMC_THREADS, else 1.
int resolve_threads(int requested);

}  // namespace pfmc
