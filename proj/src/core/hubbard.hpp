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
#include <utility>
#include <vector>

#include "apsg.hpp"
#include "gaussian_map.hpp"
#include "interacting.hpp"
#include "sampling.hpp"

namespace pfmc {

// Quench from a dimer covering with holon and doublon defects.
struct QuenchConfig {
  LatticeSpec lattice;
  std::vector<std::pair<int, int>> dimers;
  std::vector<int> holons, doublons;
  double J = 1.0;
  double W = 0.0;
  std::vector<double> times;
  int trotter_k = 4;  // dt = t / k when W > 0
  std::vector<std::pair<int, int>> czz_pairs;
  std::vector<std::vector<int>> wilson_contours;
  HsBudget hs_budget = HsBudget::Typical;

  // Dimers must be lattice links; dimers, holons and doublons partition the sites.
  void validate() const;
};

QuenchConfig quench_from_json(const nlohmann::json& j);
nlohmann::json quench_to_json(const QuenchConfig& cfg);

// Triplet blocks (c_{j up}^dag c_{k dn}^dag + c_{j dn}^dag c_{k up}^dag)/sqrt2 per
// dimer, then single-slot blocks c_{j up}^dag c_{j dn}^dag per doublon.
ApsgState build_initial_state(const QuenchConfig& cfg);

// Left and right propagation to time t: hopping evolution at W = 0, else
// independent auxiliary-field paths with k Strang slices.
Propagation quench_propagation(const QuenchConfig& cfg, double t);

Estimate doublon_number(const QuenchConfig& cfg, double t, double eps, double delta, const SamplingOptions& opt);
Estimate spin_correlator_czz(const QuenchConfig& cfg, int i, int j, double t, double eps, double delta,
                             const SamplingOptions& opt);
Estimate triplet_density(const QuenchConfig& cfg, double t, double eps, double delta, const SamplingOptions& opt);
Estimate quench_wilson_loop(const QuenchConfig& cfg, const std::vector<int>& contour, double t, double eps,
                            double delta, const SamplingOptions& opt);

struct WilsonComplexity {
  double hoeffding;   // ceil(2 (4/3)^|C| ln(2/delta) / eps^2)
  double calibrated;  // 10^3 (4/3)^(|C| - 22)
};
WilsonComplexity wilson_sample_complexity(int contour_len, double eps, double delta);

struct ComplexityEnvelope {
  double a = 0.0;  // Re lambda
  double n = 0.0;  // t / dt
  double B_worst = 1.0, B_typ = 1.0;
  double K_worst = 0.0, K_typ = 0.0;
};
ComplexityEnvelope hs_complexity_envelope(double W, double t, double dt, int sites, int r, double c_t, double eps,
                                          double delta);

// One diagnostic at one time point.
struct QuenchRow {
  std::string observable;  // N_d, C_zz, n_triplets, W_C
  std::string params;
  double t = 0.0;
  Estimate estimate;
};

// All diagnostics of the config over its time grid, each with its own seed stream.
std::vector<QuenchRow> run_quench_suite(const QuenchConfig& cfg, double eps, double delta, const SamplingOptions& opt);

// Same rows from the dense statevector (Trotterized when W > 0).
std::vector<QuenchRow> oracle_quench_suite(const QuenchConfig& cfg);

}  // namespace pfmc
