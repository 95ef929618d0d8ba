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
#include <vector>

#include "linalg.hpp"

namespace pfmc {

inline constexpr double kUnitaryTolerance = 1e-10;

// Single-particle matrix of a fermionic Gaussian map, with the convention
// G c^dag_j G^-1 = sum_i G_ij c^dag_i.
class GaussianMap {
 public:
  GaussianMap() = default;
  // Classifies the matrix as unitary when ||G^dag G - I||_max <= 1e-10.
  explicit GaussianMap(MatrixXcd g);
  static GaussianMap identity(int m);

  int num_modes() const { return static_cast<int>(g_.rows()); }
  const MatrixXcd& matrix() const { return g_; }
  bool is_unitary() const { return unitary_; }
  double op_norm() const { return op_norm_; }

 private:
  MatrixXcd g_;
  bool unitary_ = true;
  double op_norm_ = 1.0;
};

GaussianMap compose(const GaussianMap& left, const GaussianMap& right);  // left * right
GaussianMap adjoint(const GaussianMap& g);
GaussianMap diagonal_phase(const std::vector<double>& theta);

struct Link {
  int i;
  int j;
  double phi;
};

// Lattice of lx * ly sites, site s = x + lx * y. Mode layout: spin up on
// modes 0..L-1, spin down on modes L..2L-1.
struct LatticeSpec {
  int lx = 1;
  int ly = 1;
  std::vector<Link> links;
  double J = 1.0;
  bool default_phases = false;  // true when links were generated with phi = 0

  int num_sites() const { return lx * ly; }
  int num_modes() const { return 2 * num_sites(); }
  int up(int site) const { return site; }
  int down(int site) const { return num_sites() + site; }
  void validate() const;
  static LatticeSpec open_square(int lx, int ly, double J = 1.0);
};

LatticeSpec lattice_from_json(const nlohmann::json& j);
nlohmann::json lattice_to_json(const LatticeSpec& lat);

// Spin-diagonal one-body hopping matrix h0.
MatrixXcd hopping_matrix(const LatticeSpec& lat, double J);

// exp(-i h0 t).
GaussianMap hopping_evolution(const LatticeSpec& lat, double J, double t);

// Principal-branch lambda with cosh(lambda) = exp(i W dt / 2).
cd hirsch_lambda(double W, double dt);

// Strang-split propagator prod_l U_half V(sigma_l) U_half for one auxiliary
// path; sigma[l][site] in {-1, +1}, slices applied in increasing l.
GaussianMap hs_propagator(const LatticeSpec& lat, double J, double W, double dt,
                          const std::vector<std::vector<int>>& sigma);

// Building blocks reused by samplers.
struct HsFactors {
  MatrixXcd u_half;
  cd lambda;
  double norm_bound;  // e^{|Re lambda| n}
};
HsFactors hs_factors(const LatticeSpec& lat, double J, double W, double dt, int n_slices);

}  // namespace pfmc
