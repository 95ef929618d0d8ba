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

#include "observables.hpp"

#include <cmath>
#include <set>

#include "errors.hpp"

namespace pfmc {

namespace {

void validate_modes(const std::vector<int>& modes, int m) {
  std::set<int> seen;
  for (int i : modes) {
    if (i < 0 || i >= m) throw ValidationError("mode " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) throw ValidationError("mode " + std::to_string(i) + " listed twice");
  }
}

// Draws T subset of S uniformly; fills the parity map and returns prod_{i in T} s_i.
DiagonalDraw parity_draw(std::vector<int> modes, std::vector<double> mode_signs) {
  return [modes = std::move(modes), mode_signs = std::move(mode_signs)](SampleRng& rng, VectorXcd& d) {
    d.setOnes();
    double w = 1.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (rng.bit()) {
        d(modes[k]) = -1.0;
        w *= mode_signs[k];
      }
    }
    return cd(w);
  };
}

}  // namespace

Estimate estimate_correlator(const Propagation& prop, const ApsgState& phi, const ApsgState& psi,
                             const std::vector<int>& modes, double eps, double delta, const SamplingOptions& opt,
                             const BoundOverride* override_bounds) {
  validate_modes(modes, psi.num_modes());
  PairingEvaluator ev(prop, phi, psi);
  return estimate_diagonal_family(ev, parity_draw(modes, std::vector<double>(modes.size(), -1.0)), 1.0,
                                  ev.hermitian(), eps, delta, opt, override_bounds);
}

Estimate estimate_transition_correlator(const GaussianMap& left, const GaussianMap& right, const ApsgState& phi,
                                        const ApsgState& psi, const std::vector<int>& modes, double eps,
                                        double delta, const SamplingOptions& opt) {
  return estimate_correlator(Propagation::fixed(left, right), phi, psi, modes, eps, delta, opt);
}

Estimate estimate_marginal(const GaussianMap& u, const ApsgState& psi, const std::vector<int>& modes,
                           const std::vector<int>& pattern, double eps, double delta, const SamplingOptions& opt) {
  if (!u.is_unitary()) throw ValidationError("estimate_marginal: U must be unitary");
  if (pattern.size() != modes.size()) throw ValidationError("estimate_marginal: pattern length must equal |S|");
  validate_modes(modes, psi.num_modes());
  std::vector<double> signs;
  for (int a : pattern) {
    if (a != 0 && a != 1) throw ValidationError("estimate_marginal: pattern bits must be 0 or 1");
    signs.push_back(a ? -1.0 : 1.0);
  }
  PairingEvaluator ev(Propagation::fixed(u, u), psi, psi);
  return estimate_diagonal_family(ev, parity_draw(modes, signs), 1.0, true, eps, delta, opt);
}

std::vector<double> binned_from_coefficients(const std::vector<cd>& coefficients) {
  const std::size_t n = coefficients.size();
  std::vector<double> out(n, 0.0);
  const double theta = 2.0 * kPi / static_cast<double>(n);
  for (std::size_t w = 0; w < n; ++w) {
    cd s(0.0);
    for (std::size_t k = 0; k < n; ++k)
      s += std::polar(1.0, -theta * static_cast<double>((k * w) % n)) * coefficients[k];
    out[w] = s.real() / static_cast<double>(n);
  }
  return out;
}

BinnedDistribution estimate_binned_distribution(const GaussianMap& u, const ApsgState& psi,
                                                const std::vector<int>& omega, double eps, double delta,
                                                const SamplingOptions& opt) {
  if (static_cast<int>(omega.size()) != psi.num_modes()) throw ValidationError("binned: need one weight per mode");
  long total = 0;
  for (int w : omega) {
    if (w < 0) throw ValidationError("binned: weights must be non-negative");
    total += w;
  }
  if (total > kMaxBinnedOmega)
    throw CapacityError("binned: Omega_max = " + std::to_string(total) + " exceeds " + std::to_string(kMaxBinnedOmega));
  const int n = static_cast<int>(total) + 1;
  const int estimated = n / 2 + 1;
  const double theta = 2.0 * kPi / n;
  PairingEvaluator ev(Propagation::fixed(u, u), psi, psi);
  BinnedDistribution out;
  out.epsilon = eps;
  out.delta = delta;
  std::vector<cd> coeff(n);
  for (int k = 0; k < estimated; ++k) {
    VectorXcd d(psi.num_modes());
    for (int i = 0; i < psi.num_modes(); ++i) d(i) = std::polar(1.0, theta * ((static_cast<long>(k) * omega[i]) % n));
    SamplingOptions o = opt;
    o.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
    Estimate e = estimate_diagonal_family(
        ev, [d](SampleRng&, VectorXcd& out_d) { out_d = d; return cd(1.0); }, 1.0, false, eps,
        delta / estimated, o);
    coeff[k] = e.value;
    out.samples += e.samples;
    out.coefficients.push_back(e);
  }
  for (int k = estimated; k < n; ++k) coeff[k] = std::conj(coeff[n - k]);
  out.probabilities = binned_from_coefficients(coeff);
  return out;
}

cd charge_phase_value(int q) {
  cd s(0.0);
  for (int sigma : {-1, 1}) s += std::polar(1.0, -sigma * kPi / 6.0) * std::polar(1.0, sigma * kPi * q / 3.0);
  return 2.0 / std::sqrt(3.0) * s / 2.0;
}

void validate_contour(const std::vector<int>& contour, int num_modes) {
  if (num_modes % 2) throw ValidationError("Wilson loop: spinful layout needs an even mode count");
  std::set<int> seen;
  for (int j : contour) {
    if (j < 0 || j >= num_modes / 2) throw ValidationError("Wilson loop: site " + std::to_string(j) + " out of range");
    if (!seen.insert(j).second) throw ValidationError("Wilson loop: duplicate contour site " + std::to_string(j));
  }
}

Estimate estimate_wilson_loop(const Propagation& prop, const ApsgState& psi, const std::vector<int>& contour,
                              double eps, double delta, const SamplingOptions& opt,
                              const BoundOverride* override_bounds) {
  validate_contour(contour, psi.num_modes());
  const int l = psi.num_modes() / 2;
  const double prefactor = std::pow(2.0 / std::sqrt(3.0), static_cast<double>(contour.size()));
  PairingEvaluator ev(prop, psi, psi);
  auto draw = [contour, l, prefactor](SampleRng& rng, VectorXcd& d) {
    d.setOnes();
    int total = 0;
    for (int j : contour) {
      int sigma = rng.sign();
      total += sigma;
      cd ph = std::polar(1.0, sigma * kPi / 3.0);
      d(j) = ph;
      d(j + l) = ph;
    }
    return prefactor * std::polar(1.0, -kPi / 6.0 * total);
  };
  return estimate_diagonal_family(ev, draw, prefactor, ev.hermitian(), eps, delta, opt, override_bounds);
}

Estimate estimate_wilson_loop(const GaussianMap& u, const ApsgState& psi, const std::vector<int>& contour,
                              double eps, double delta, const SamplingOptions& opt) {
  if (!u.is_unitary()) throw ValidationError("estimate_wilson_loop: U must be unitary");
  return estimate_wilson_loop(Propagation::fixed(u, u), psi, contour, eps, delta, opt);
}

cd wilson_loop_enumerated(const GaussianMap& u, const ApsgState& psi, const std::vector<int>& contour) {
  validate_contour(contour, psi.num_modes());
  if (contour.size() > 16) throw CapacityError("wilson_loop_enumerated: contour longer than 16 sites");
  const int l = psi.num_modes() / 2;
  const double prefactor = std::pow(2.0 / std::sqrt(3.0), static_cast<double>(contour.size()));
  PairingEvaluator ev(Propagation::fixed(u, u), psi, psi);
  const MatrixXcd ud = u.matrix().adjoint();
  cd total(0.0);
  for (std::uint32_t mask = 0; mask < (1U << contour.size()); ++mask) {
    VectorXcd d = VectorXcd::Ones(psi.num_modes());
    int sum = 0;
    for (std::size_t k = 0; k < contour.size(); ++k) {
      int sigma = (mask >> k & 1U) ? -1 : 1;
      sum += sigma;
      d(contour[k]) = d(contour[k] + l) = std::polar(1.0, sigma * kPi / 3.0);
    }
    MatrixXcd kernel = ud * d.asDiagonal() * u.matrix();
    total += prefactor * std::polar(1.0, -kPi / 6.0 * sum) * ev.exact(kernel);
  }
  return total / std::ldexp(1.0, static_cast<int>(contour.size()));
}

}  // namespace pfmc
