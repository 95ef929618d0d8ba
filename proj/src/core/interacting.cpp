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

#include "interacting.hpp"

#include <cmath>

#include "errors.hpp"

namespace pfmc {

double hs_worst_bound(cd lambda, double n_slices, int r, double c_t) {
  return c_t * std::exp(2.0 * std::abs(lambda.real()) * n_slices * r);
}

double hs_typical_bound(cd lambda, int sites, double t, double dt) {
  return std::exp(std::sqrt(2.0 / kPi) * std::abs(lambda.real()) * sites * std::sqrt(t / dt));
}

Estimate estimate_hs_parity(const LatticeSpec& lat, double J, double W, double dt, int n_slices,
                            const ApsgState& psi, const std::vector<int>& parity_modes, double eps, double delta,
                            const SamplingOptions& opt, HsBudget budget) {
  if (psi.num_modes() != lat.num_modes()) throw ValidationError("hs_parity: state and lattice differ in mode count");
  for (int i : parity_modes)
    if (i < 0 || i >= psi.num_modes()) throw ValidationError("hs_parity: mode out of range");
  Propagation prop = Propagation::hubbard_hs(lat, J, W, dt, n_slices);
  PairingEvaluator ev(prop, psi, psi);
  VectorXcd parity = VectorXcd::Ones(psi.num_modes());
  for (int i : parity_modes) parity(i) = -parity(i);
  DiagonalDraw draw = [parity](SampleRng&, VectorXcd& d) {
    d = parity;
    return cd(1.0);
  };
  const double b_typ = hs_typical_bound(prop.lambda(), lat.num_sites(), n_slices * dt, dt);
  // Bra and ket paths are independent, so the typical scale enters squared.
  BoundOverride typical{b_typ * b_typ * ev.pointwise_unit() / ev.moment_unit(), INFINITY, false};
  Estimate e = estimate_diagonal_family(ev, draw, 1.0, true, eps, delta, opt,
                                        budget == HsBudget::Typical ? &typical : nullptr);
  e.extras["a"] = prop.lambda().real();
  // r = 2N, the Pfaffian dimension; this equals the pathwise bound used above.
  e.extras["r"] = 2.0 * psi.num_blocks();
  e.extras["B_worst"] = hs_worst_bound(prop.lambda(), n_slices, 2 * psi.num_blocks(), 1.0);
  e.extras["B_typ"] = b_typ;
  return e;
}

StateVector trotter_evolve(const LatticeSpec& lat, double J, double W, double dt, int n_slices, StateVector v) {
  const int l = lat.num_sites();
  MatrixXcd u_half = expm_hermitian(hopping_matrix(lat, J), cd(0.0, -dt / 2.0));
  for (int s = 0; s < n_slices; ++s) {
    v = apply_single_particle_map(u_half, v);
    for (std::uint64_t b = 0; b < v.size(); ++b) {
      int doublons = 0;
      for (int j = 0; j < l; ++j) doublons += ((b >> j) & (b >> (j + l)) & 1U);
      v[b] *= std::polar(1.0, -dt * W * doublons);
    }
    v = apply_single_particle_map(u_half, v);
  }
  return v;
}

double oracle_hs_parity(const LatticeSpec& lat, double J, double W, double dt, int n_slices, const ApsgState& psi,
                        const std::vector<int>& parity_modes) {
  StateVector v = trotter_evolve(lat, J, W, dt, n_slices, apsg_to_statevector(psi));
  std::uint64_t mask = 0;
  for (int i : parity_modes) mask |= std::uint64_t{1} << i;
  double s = 0.0;
  for (std::uint64_t b = 0; b < v.size(); ++b)
    s += ((__builtin_popcountll(b & mask) & 1) ? -1.0 : 1.0) * std::norm(v[b]);
  return s;
}

namespace {

void validate_circuit(const std::vector<CircuitElement>& circuit, int m) {
  for (const auto& e : circuit) {
    if (e.map) {
      if (e.map->num_modes() != m) throw ValidationError("circuit layer has the wrong mode count");
    } else {
      if (e.i < 0 || e.i >= m || e.j < 0 || e.j >= m || e.i == e.j)
        throw ValidationError("phase gate needs two distinct modes in range");
      if (e.theta < 0.0 || e.theta > kPi / 2.0)
        throw ValidationError("phase gate angle must lie in [0, pi/2]");
    }
  }
}

}  // namespace

Estimate estimate_extent_overlap(const std::vector<CircuitElement>& circuit, const ApsgState& phi,
                                 const ApsgState& psi, double eps, double delta, const SamplingOptions& opt) {
  const int m = psi.num_modes();
  validate_circuit(circuit, m);
  double sqrt_xi = 1.0, layer_norm = 1.0;
  for (const auto& e : circuit) {
    if (e.map) layer_norm *= e.map->op_norm();
    else sqrt_xi *= std::cos(e.theta) + std::sin(e.theta);
  }
  GaussianMap id = GaussianMap::identity(m);
  PairingEvaluator ev(Propagation::fixed(id, id), phi, psi);
  const double lpow = std::pow(layer_norm, 2 * psi.num_blocks());
  Sampler s;
  s.make_worker = [&ev, &circuit, m, sqrt_xi] {
    auto ctx = std::make_shared<PairingEvaluator::Context>();
    auto mid = std::make_shared<Middle>(Middle::full(MatrixXcd::Identity(m, m)));
    return [&ev, &circuit, ctx, mid, sqrt_xi](SampleRng& rng) {
      MatrixXcd& u = mid->dense;
      u.setIdentity();
      int flips = 0;
      for (const auto& e : circuit) {
        if (e.map) {
          u = e.map->matrix() * u;
        } else {
          double c = std::cos(e.theta), sn = std::sin(e.theta);
          if (rng.uniform() < sn / (c + sn)) {
            ++flips;
            u.row(e.i) *= -1.0;
            u.row(e.j) *= -1.0;
          }
        }
      }
      static const cd kPowI[4] = {cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1)};
      ev.draw(rng, *ctx);
      return sqrt_xi * kPowI[flips % 4] * ev.evaluate(*ctx, *mid);
    };
  };
  if (ev.particle_mismatch()) {
    Estimate e;
    e.delta = delta;
    e.aggregation = "exact";
    return e;
  }
  s.pointwise_bound = sqrt_xi * ev.pointwise_unit() * lpow;
  s.moment_bound = sqrt_xi * lpow;
  Estimate e = run_sampler(s, eps, delta, opt);
  e.extras["sqrt_xi"] = sqrt_xi;
  e.extras["gamma"] = ev.gamma();
  return e;
}

cd oracle_circuit_overlap(const std::vector<CircuitElement>& circuit, const ApsgState& phi, const ApsgState& psi) {
  validate_circuit(circuit, psi.num_modes());
  StateVector v = apsg_to_statevector(psi);
  for (const auto& e : circuit) {
    if (e.map) {
      v = apply_single_particle_map(e.map->matrix(), v);
    } else {
      for (std::uint64_t b = 0; b < v.size(); ++b) {
        int z = (((b >> e.i) & 1U) ? -1 : 1) * (((b >> e.j) & 1U) ? -1 : 1);
        v[b] *= std::polar(1.0, e.theta * z);
      }
    }
  }
  return apsg_to_statevector(phi).inner(v);
}

}  // namespace pfmc
