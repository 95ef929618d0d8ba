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

#include "gaussian_map.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace pfmc {

GaussianMap::GaussianMap(MatrixXcd g) : g_(std::move(g)) {
  if (g_.rows() != g_.cols()) throw ValidationError("Gaussian map matrix must be square");
  const auto n = g_.rows();
  if (!g_.allFinite()) throw ValidationError("Gaussian map matrix has non-finite entries");
  double dev = n ? (g_.adjoint() * g_ - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() : 0.0;
  unitary_ = dev <= kUnitaryTolerance;
  op_norm_ = unitary_ ? 1.0 : pfmc::op_norm(g_);
}

GaussianMap GaussianMap::identity(int m) { return GaussianMap(MatrixXcd::Identity(m, m)); }

GaussianMap compose(const GaussianMap& left, const GaussianMap& right) {
  if (left.num_modes() != right.num_modes()) throw ValidationError("compose: mode counts differ");
  return GaussianMap(left.matrix() * right.matrix());
}

GaussianMap adjoint(const GaussianMap& g) { return GaussianMap(g.matrix().adjoint()); }

GaussianMap diagonal_phase(const std::vector<double>& theta) {
  VectorXcd d(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) d(i) = std::polar(1.0, theta[i]);
  return GaussianMap(MatrixXcd(d.asDiagonal()));
}

void LatticeSpec::validate() const {
  if (lx < 1 || ly < 1) throw ValidationError("lattice: lx and ly must be positive");
  if (num_modes() > 64) throw CapacityError("lattice: more than 64 modes");
  std::set<std::pair<int, int>> seen;
  for (const auto& l : links) {
    const int n = num_sites();
    if (l.i < 0 || l.i >= n || l.j < 0 || l.j >= n || l.i == l.j) {
      std::ostringstream os;
      os << "lattice: bad link (" << l.i << "," << l.j << ")";
      throw ValidationError(os.str());
    }
    int dx = std::abs(l.i % lx - l.j % lx), dy = std::abs(l.i / lx - l.j / lx);
    bool wrap_x = dx == lx - 1 && lx > 2, wrap_y = dy == ly - 1 && ly > 2;
    bool nn = (dy == 0 && (dx == 1 || wrap_x)) || (dx == 0 && (dy == 1 || wrap_y));
    if (!nn) {
      std::ostringstream os;
      os << "lattice: link (" << l.i << "," << l.j << ") is not nearest-neighbor";
      throw ValidationError(os.str());
    }
    if (!seen.insert({std::min(l.i, l.j), std::max(l.i, l.j)}).second) {
      std::ostringstream os;
      os << "lattice: link (" << l.i << "," << l.j << ") listed twice";
      throw ValidationError(os.str());
    }
  }
}

LatticeSpec LatticeSpec::open_square(int lx, int ly, double J) {
  LatticeSpec lat;
  lat.lx = lx;
  lat.ly = ly;
  lat.J = J;
  lat.default_phases = true;
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      int s = x + lx * y;
      if (x + 1 < lx) lat.links.push_back({s, s + 1, 0.0});
      if (y + 1 < ly) lat.links.push_back({s, s + lx, 0.0});
    }
  lat.validate();
  return lat;
}

LatticeSpec lattice_from_json(const nlohmann::json& j) {
  try {
    int lx = j.at("lx").get<int>(), ly = j.at("ly").get<int>();
    double J = j.value("J", 1.0);
    if (lx < 1 || ly < 1) throw ValidationError("lattice: lx and ly must be positive");
    if (!j.contains("links")) return LatticeSpec::open_square(lx, ly, J);
    LatticeSpec lat;
    lat.lx = lx;
    lat.ly = ly;
    lat.J = J;
    for (const auto& l : j.at("links")) {
      Link k{l.at("i").get<int>(), l.at("j").get<int>(), 0.0};
      if (l.contains("phi")) k.phi = l.at("phi").get<double>();
      else lat.default_phases = true;
      lat.links.push_back(k);
    }
    lat.validate();
    return lat;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("lattice JSON: ") + e.what());
  }
}

nlohmann::json lattice_to_json(const LatticeSpec& lat) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : lat.links) links.push_back({{"i", l.i}, {"j", l.j}, {"phi", l.phi}});
  return {{"lx", lat.lx}, {"ly", lat.ly}, {"links", links}, {"J", lat.J}};
}

MatrixXcd hopping_matrix(const LatticeSpec& lat, double J) {
  lat.validate();
  const int n = lat.num_sites();
  MatrixXcd h = MatrixXcd::Zero(2 * n, 2 * n);
  for (const auto& l : lat.links) {
    cd hop = -J * std::polar(1.0, l.phi);
    for (int spin = 0; spin < 2; ++spin) {
      int a = l.i + spin * n, b = l.j + spin * n;
      h(a, b) += hop;
      h(b, a) += std::conj(hop);
    }
  }
  return h;
}

GaussianMap hopping_evolution(const LatticeSpec& lat, double J, double t) {
  return GaussianMap(expm_hermitian(hopping_matrix(lat, J), cd(0.0, -t)));
}

cd hirsch_lambda(double W, double dt) {
  cd z = std::polar(1.0, W * dt / 2.0);
  return std::acosh(z);
}

HsFactors hs_factors(const LatticeSpec& lat, double J, double W, double dt, int n_slices) {
  if (!(dt > 0.0)) throw ValidationError("hs: dt must be positive");
  if (n_slices < 1) throw ValidationError("hs: need at least one slice");
  HsFactors f;
  f.u_half = expm_hermitian(hopping_matrix(lat, J), cd(0.0, -dt / 2.0));
  f.lambda = hirsch_lambda(W, dt);
  f.norm_bound = std::exp(std::abs(f.lambda.real()) * n_slices);
  return f;
}

GaussianMap hs_propagator(const LatticeSpec& lat, double J, double W, double dt,
                          const std::vector<std::vector<int>>& sigma) {
  const int n = lat.num_sites();
  HsFactors f = hs_factors(lat, J, W, dt, static_cast<int>(sigma.size()));
  MatrixXcd g = MatrixXcd::Identity(2 * n, 2 * n);
  VectorXcd v(2 * n);
  for (const auto& slice : sigma) {
    if (static_cast<int>(slice.size()) != n) throw ValidationError("hs_propagator: sigma slice has wrong length");
    for (int s = 0; s < n; ++s) {
      if (slice[s] != 1 && slice[s] != -1) throw ValidationError("hs_propagator: sigma entries must be +1 or -1");
      v(s) = std::exp(-f.lambda * double(slice[s]));
      v(n + s) = std::exp(f.lambda * double(slice[s]));
    }
    g = f.u_half * v.asDiagonal() * f.u_half * g;
  }
  GaussianMap out(g);
  if (out.op_norm() > f.norm_bound * (1.0 + 1e-9))
    throw ValidationError("hs_propagator: operator norm exceeds e^{|a| n}");
  return out;
}

}  // namespace pfmc
