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

#include <functional>
#include <memory>
#include <vector>

#include "apsg.hpp"
#include "fock.hpp"
#include "gaussian_map.hpp"
#include "sampling.hpp"

namespace pfmc {

// Left and right maps around an observable kernel, G_l^dag M G_r. Either a
// fixed pair or independent auxiliary-field paths drawn per sample.
class Propagation {
 public:
  static Propagation fixed(const GaussianMap& left, const GaussianMap& right);
  static Propagation hubbard_hs(const LatticeSpec& lat, double J, double W, double dt, int n_slices);

  int num_modes() const { return num_modes_; }
  double norm_bound() const { return norm_bound_; }  // bound on ||G_l|| ||G_r||
  bool is_random() const { return random_; }
  bool symmetric() const { return symmetric_; }      // left and right share a law
  bool is_unitary() const { return unitary_; }
  const MatrixXcd& left_adjoint() const { return left_adj_; }
  const MatrixXcd& right() const { return right_; }

  // Hubbard parameters, valid when is_random().
  const LatticeSpec& lattice() const { return lat_; }
  cd lambda() const { return hs_.lambda; }
  int num_slices() const { return n_slices_; }
  double dt() const { return dt_; }

  // G(sigma) for a freshly drawn path.
  void draw_path(SampleRng& rng, MatrixXcd& out) const;

 private:
  int num_modes_ = 0;
  double norm_bound_ = 1.0;
  bool random_ = false, symmetric_ = false, unitary_ = true;
  MatrixXcd left_adj_, right_;
  LatticeSpec lat_;
  HsFactors hs_;
  int n_slices_ = 0;
  double dt_ = 0.0;
};

// Middle map of a sampled kernel.
struct Middle {
  enum class Kind { Identity, Diagonal, Dense, LowRank } kind = Kind::Identity;
  VectorXcd diag;
  MatrixXcd dense;
  MatrixXcd u, vt;  // I + u * vt

  static Middle identity() { return {}; }
  static Middle diagonal(VectorXcd d) {
    Middle m;
    m.kind = Kind::Diagonal;
    m.diag = std::move(d);
    return m;
  }
  static Middle full(MatrixXcd x) {
    Middle m;
    m.kind = Kind::Dense;
    m.dense = std::move(x);
    return m;
  }
  static Middle low_rank(MatrixXcd u, MatrixXcd vt) {
    Middle m;
    m.kind = Kind::LowRank;
    m.u = std::move(u);
    m.vt = std::move(vt);
    return m;
  }
};

// Sampled transition amplitude <Phi| G_l^dag M G_r |Psi>. One draw fixes the
// propagation path, the bra slot pattern and the sign vector b; evaluate()
// can then be called for several middles with common random numbers.
class PairingEvaluator {
 public:
  struct Context {
    MatrixXcd left_buf, right_buf;
    const MatrixXcd* left_adj = nullptr;
    const MatrixXcd* right = nullptr;
    std::vector<int> seq, rows;
    std::vector<int> b;
    cd weight{1.0};  // prod 1/v times the creation-order sign times gamma
    MatrixXcd ls, tmp, kr, a;
  };

  PairingEvaluator(Propagation prop, const ApsgState& phi, const ApsgState& psi);

  void draw(SampleRng& rng, Context& c) const;
  cd evaluate(Context& c, const Middle& m) const;

  int num_modes() const { return m_; }
  int num_pairs() const { return n_; }
  bool particle_mismatch() const { return mismatch_; }
  // The target is real when bra and ket states agree and the propagation is symmetric.
  bool hermitian() const { return hermitian_; }
  double pointwise_unit() const { return pointwise_; }  // sup of |one-shot| for a unitary middle
  double moment_unit() const { return moment_; }         // sqrt(E|one-shot|^2) bound, unitary middle
  double gamma() const { return gamma_; }
  const Propagation& propagation() const { return prop_; }

  // Pfaffian part for given kernel rows and signs, with rescaled weights.
  cd fock_value(const MatrixXcd& rows, const std::vector<int>& b, MatrixXcd& a) const;

  // Exhaustive average over bra patterns and sign vectors for a fixed kernel.
  cd exact(const MatrixXcd& kernel) const;

 private:
  struct Slot {
    int a, b, block;
    cd coef;
  };
  struct BraBlock {
    std::vector<int> first, second;
    std::vector<cd> inv_weight;
    std::vector<double> cumulative;
  };
  Propagation prop_;
  int m_ = 0, n_ = 0;
  bool mismatch_ = false, hermitian_ = false;
  double gamma_ = 1.0, pointwise_ = 1.0, moment_ = 1.0;
  std::vector<Slot> slots_;
  std::vector<BraBlock> bra_;
};

// pf(sum_t b_t B_t) prod_t b_t for the Fock bra x and rescaled ket weights.
cd one_shot_fock(const GaussianMap& g, const ApsgState& psi, const FockState& x, const std::vector<int>& b);

// Additive error eps * gamma * ||G||^{2N}.
Estimate estimate_fock_overlap(const GaussianMap& g, const ApsgState& psi, const FockState& x, double eps,
                               double delta, const SamplingOptions& opt);

// Additive error eps * ||G||^{2N}.
Estimate estimate_apsg_overlap(const GaussianMap& g, const ApsgState& phi, const ApsgState& psi, double eps,
                               double delta, const SamplingOptions& opt);

// Exact <Phi|G|Psi> by averaging the one-shot over all patterns and signs.
cd exact_apsg_overlap(const GaussianMap& g, const ApsgState& phi, const ApsgState& psi);

// Draws a diagonal middle and a scalar weight for one sample.
using DiagonalDraw = std::function<cd(SampleRng& rng, VectorXcd& d)>;

// Replaces the rigorous bounds, e.g. by a heuristic magnitude scale.
struct BoundOverride {
  double pointwise;
  double moment;
  bool certified;
};

// Generic estimator of E[w <Phi|G_l^dag D G_r|Psi>] over random diagonal middles,
// with |w| <= weight_bound and |D_ii| <= 1.
Estimate estimate_diagonal_family(const PairingEvaluator& ev, DiagonalDraw draw, double weight_bound,
                                  bool real_target, double eps, double delta, const SamplingOptions& opt,
                                  const BoundOverride* override_bounds = nullptr);

}  // namespace pfmc
