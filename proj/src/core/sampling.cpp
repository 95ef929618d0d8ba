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

#include "sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "errors.hpp"

namespace pfmc {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ 0x5851F42D4C957F2DULL;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (stream * 0xD1B54A32D192ED03ULL);
  return splitmix64(t);
}

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t key = splitmix64(s);
  std::uint64_t t = key ^ (index * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  state_ = splitmix64(t);
}

double hoeffding_samples(double bound, double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw ValidationError("need eps > 0 and 0 < delta < 1");
  return std::ceil(2.0 * bound * bound * std::log(2.0 / delta) / (eps * eps));
}

MomPlan mom_plan(double bound, double eps, double delta, bool real_target) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw ValidationError("need eps > 0 and 0 < delta < 1");
  double g = std::ceil(8.0 * std::log(2.0 / delta));
  double m = std::ceil((real_target ? 4.0 : 8.0) * bound * bound / (eps * eps));
  if (g * m > 9e18) throw CapacityError("median-of-means budget overflows");
  return {static_cast<std::int64_t>(g), static_cast<std::int64_t>(m)};
}

cd median_of_means(const std::vector<cd>& samples, int groups) {
  if (groups < 1 || static_cast<std::size_t>(groups) > samples.size())
    throw ValidationError("median_of_means: need 1 <= groups <= number of samples");
  const std::size_t n = samples.size(), g = static_cast<std::size_t>(groups);
  std::vector<double> re, im;
  for (std::size_t k = 0; k < g; ++k) {
    std::size_t lo = k * n / g, hi = (k + 1) * n / g;
    cd s(0.0);
    for (std::size_t i = lo; i < hi; ++i) s += samples[i];
    s /= static_cast<double>(hi - lo);
    re.push_back(s.real());
    im.push_back(s.imag());
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  return {median(re), median(im)};
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PFMC_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

namespace {

struct UnitSums {
  double re = 0.0, im = 0.0, sq_re = 0.0, sq_im = 0.0;
};

// Evaluates samples [lo, hi) of every unit on a pool of workers. Each unit is
// summed in index order so totals are independent of the thread count.
std::vector<UnitSums> evaluate_units(const Sampler& s, const std::vector<std::pair<std::int64_t, std::int64_t>>& units,
                                     std::uint64_t seed, int threads) {
  std::vector<UnitSums> sums(units.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    try {
      auto one_shot = s.make_worker();
      for (std::size_t u = next++; u < units.size(); u = next++) {
        UnitSums acc;
        for (std::int64_t k = units[u].first; k < units[u].second; ++k) {
          SampleRng rng(seed, static_cast<std::uint64_t>(k));
          cd x = one_shot(rng);
          acc.re += x.real();
          acc.im += x.imag();
          acc.sq_re += x.real() * x.real();
          acc.sq_im += x.imag() * x.imag();
        }
        sums[u] = acc;
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next = units.size();
    }
  };
  int nt = std::max(1, std::min<int>(threads, static_cast<int>(units.size())));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return sums;
}

double chebyshev_eps(double b2, std::int64_t k, double delta) { return b2 / std::sqrt(static_cast<double>(k) * delta); }

double hoeffding_eps(double b, std::int64_t k, double delta, bool real_target) {
  if (real_target) return b * std::sqrt(2.0 * std::log(2.0 / delta) / static_cast<double>(k));
  return std::sqrt(2.0) * b * std::sqrt(2.0 * std::log(4.0 / delta) / static_cast<double>(k));
}

}  // namespace

Estimate run_sampler(const Sampler& s, double eps, double delta, const SamplingOptions& opt) {
  if (!(eps > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  Estimate est;
  est.delta = delta;
  est.certified = s.certified;
  const bool has_pointwise = std::isfinite(s.pointwise_bound);
  const bool has_moment = std::isfinite(s.moment_bound);
  if (!has_pointwise && !has_moment) throw ValidationError("sampler has no variance bound");

  std::int64_t total = 0;
  std::int64_t groups = 0;  // > 0 selects median-of-means
  if (opt.fixed_samples > 0) {
    total = opt.fixed_samples;
    double e_h = has_pointwise ? hoeffding_eps(s.pointwise_bound, total, delta, s.real_target) : INFINITY;
    double e_c = has_moment ? chebyshev_eps(s.moment_bound, total, delta) : INFINITY;
    est.epsilon = std::min(e_h, e_c);
    est.bound = e_h <= e_c ? s.pointwise_bound : s.moment_bound;
    est.aggregation = "mean";
  } else {
    double k_h = INFINITY, k_m = INFINITY;
    MomPlan plan{0, 0};
    if (has_pointwise)
      k_h = s.real_target ? hoeffding_samples(s.pointwise_bound, eps, delta)
                          : hoeffding_samples(s.pointwise_bound, eps / std::sqrt(2.0), delta / 2.0);
    if (has_moment) {
      plan = mom_plan(s.moment_bound, eps, delta, s.real_target);
      k_m = static_cast<double>(plan.groups) * static_cast<double>(plan.group_size);
    }
    double k = std::min(k_h, k_m);
    if (k > opt.max_samples) {
      std::ostringstream os;
      os << "sample budget " << k << " exceeds the limit " << opt.max_samples
         << " (bound " << (k_h <= k_m ? s.pointwise_bound : s.moment_bound) << ", eps " << eps << ")";
      throw CapacityError(os.str());
    }
    est.epsilon = eps;
    if (k_h <= k_m) {
      total = static_cast<std::int64_t>(k_h);
      est.bound = s.pointwise_bound;
      est.aggregation = "mean";
    } else {
      total = plan.total();
      groups = plan.groups;
      est.bound = s.moment_bound;
      est.aggregation = "median_of_means";
    }
  }
  if (total < 1) total = 1;

  std::vector<std::pair<std::int64_t, std::int64_t>> units;
  if (groups > 0) {
    const std::int64_t m = total / groups;
    for (std::int64_t g = 0; g < groups; ++g) units.push_back({g * m, (g + 1) * m});
  } else {
    const std::int64_t chunk = 4096;
    for (std::int64_t lo = 0; lo < total; lo += chunk) units.push_back({lo, std::min(total, lo + chunk)});
  }
  auto sums = evaluate_units(s, units, opt.seed, resolve_threads(opt.threads));

  UnitSums all;
  for (const auto& u : sums) {
    all.re += u.re;
    all.im += u.im;
    all.sq_re += u.sq_re;
    all.sq_im += u.sq_im;
  }
  const double n = static_cast<double>(total);
  cd mean(all.re / n, all.im / n);
  double var_re = n > 1 ? std::max(0.0, (all.sq_re - n * mean.real() * mean.real()) / (n - 1)) : 0.0;
  double var_im = n > 1 ? std::max(0.0, (all.sq_im - n * mean.imag() * mean.imag()) / (n - 1)) : 0.0;
  if (s.real_target) {
    mean = cd(mean.real(), 0.0);
    var_im = 0.0;
  }
  est.std_error = std::sqrt((var_re + var_im) / n);
  est.samples = total;
  if (groups > 0) {
    std::vector<double> re, im;
    for (std::size_t g = 0; g < sums.size(); ++g) {
      double sz = static_cast<double>(units[g].second - units[g].first);
      re.push_back(sums[g].re / sz);
      im.push_back(sums[g].im / sz);
    }
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      std::size_t h = v.size() / 2;
      return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    };
    est.value = cd(median(re), s.real_target ? 0.0 : median(im));
  } else {
    est.value = mean;
  }
  return est;
}

}  // namespace pfmc
