// Copyright 2026 The irsaj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Propagation model: geometry, log-distance pathloss, Rayleigh small-scale
// fading, and the composite BS -> (IRS) -> UE channel under a phase profile.

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "irsaj/common.hpp"

namespace irsaj {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct Geometry {
  Point bs{0.0, 0.0};
  Point irs{75.0, 100.0};
  Point jammer{100.0, 50.0};
  std::vector<Point> ues;
  Rect ue_region{100.0, 200.0, 0.0, 100.0};

  std::size_t n_ues() const { return ues.size(); }

  void validate() const {
    if (ues.empty()) throw ConfigError("geometry.n_ues", "at least one UE is required");
    if (!(ue_region.x_max > ue_region.x_min) || !(ue_region.y_max > ue_region.y_min))
      throw ConfigError("geometry.ue_region", "region must have positive extent");
    if (!(distance(bs, irs) > 0.0))
      throw ConfigError("geometry.irs", "IRS coincides with the BS");
    for (const Point& u : ues) {
      if (!(distance(bs, u) > 0.0) || !(distance(irs, u) > 0.0) || !(distance(jammer, u) > 0.0))
        throw ConfigError("geometry.ues", "a UE coincides with the BS, IRS or jammer");
    }
  }
};

// Uniform placement of `n_ues` inside the region. Redraws points that would
// land exactly on another node (measure-zero, but the distance invariant is hard).
inline Geometry place_ues(Geometry geom, std::size_t n_ues, Rng& rng) {
  if (n_ues == 0) throw ConfigError("geometry.n_ues", "at least one UE is required");
  geom.ues.clear();
  const Rect& r = geom.ue_region;
  while (geom.ues.size() < n_ues) {
    Point p{r.x_min + (r.x_max - r.x_min) * uniform01(rng),
            r.y_min + (r.y_max - r.y_min) * uniform01(rng)};
    if (distance(p, geom.bs) > 0.0 && distance(p, geom.irs) > 0.0 &&
        distance(p, geom.jammer) > 0.0)
      geom.ues.push_back(p);
  }
  return geom;
}

struct PathlossConfig {
  double pl0_db = 30.0;
  double d0 = 1.0;
  double beta_bu = 3.75;
  double beta_br = 2.2;
  double beta_ru = 2.2;
  double beta_ju = 2.5;

  void validate() const {
    if (!(d0 > 0.0)) throw ConfigError("pathloss.d0", "must be > 0");
    const std::pair<const char*, double> exps[] = {
        {"pathloss.beta_bu", beta_bu}, {"pathloss.beta_br", beta_br},
        {"pathloss.beta_ru", beta_ru}, {"pathloss.beta_ju", beta_ju}};
    for (const auto& [path, beta] : exps)
      if (!(beta > 0.0)) throw ConfigError(path, "pathloss exponent must be > 0");
  }
};

// Linear channel power gain at distance d. The loss in dB is
// PL0 + 10*beta*log10(d/d0), so the gain decays with distance.
inline double pathloss_gain(double d, double beta, const PathlossConfig& cfg) {
  if (!(d > 0.0)) throw std::domain_error("pathloss_gain: distance must be > 0");
  const double loss_db = cfg.pl0_db + 10.0 * beta * std::log10(d / cfg.d0);
  return std::pow(10.0, -loss_db / 10.0);
}

// i.i.d. CN(0, 1) entries.
inline CMatrix sample_fading(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw std::domain_error("sample_fading: dimensions must be >= 1");
  CMatrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = complex_normal(rng);
  return out;
}

struct ChannelDims {
  std::size_t n_bs_antennas = 8;      // N
  std::size_t n_irs_elements = 60;    // M
  std::size_t n_jammer_antennas = 8;  // N_J
};

// One coherence block of channel state. Vectors are stored as columns; the
// model uses their Hermitian transposes as row channels (g^H).
struct ChannelSet {
  CMatrix g_bs_irs;                 // G, M x N
  std::vector<CVector> g_bs_ue;     // g_bu,k, length N
  std::vector<CVector> g_irs_ue;    // g_ru,k, length M
  std::vector<CVector> g_jam_ue;    // h_J,k, length N_J

  std::size_t n_ues() const { return g_bs_ue.size(); }
  std::size_t n_bs_antennas() const { return static_cast<std::size_t>(g_bs_irs.cols()); }
  std::size_t n_irs_elements() const { return static_cast<std::size_t>(g_bs_irs.rows()); }
  std::size_t n_jammer_antennas() const {
    return g_jam_ue.empty() ? 0 : static_cast<std::size_t>(g_jam_ue.front().size());
  }

  bool consistent() const {
    const auto K = g_bs_ue.size();
    if (K == 0 || g_irs_ue.size() != K || g_jam_ue.size() != K) return false;
    for (std::size_t k = 0; k < K; ++k) {
      if (static_cast<std::size_t>(g_bs_ue[k].size()) != n_bs_antennas()) return false;
      if (static_cast<std::size_t>(g_irs_ue[k].size()) != n_irs_elements()) return false;
      if (static_cast<std::size_t>(g_jam_ue[k].size()) != n_jammer_antennas()) return false;
    }
    return true;
  }

  bool all_finite() const {
    auto finite = [](const auto& m) { return m.allFinite(); };
    if (!finite(g_bs_irs)) return false;
    for (std::size_t k = 0; k < n_ues(); ++k)
      if (!finite(g_bs_ue[k]) || !finite(g_irs_ue[k]) || !finite(g_jam_ue[k])) return false;
    return true;
  }
};

// Source of small-scale fading blocks, (rows, cols) -> matrix. Swappable so
// tests can pin the fading and isolate the pathloss scaling.
using FadingSource = std::function<CMatrix(Eigen::Index, Eigen::Index)>;

inline ChannelSet generate_channels(const Geometry& geom, const PathlossConfig& cfg,
                                    const ChannelDims& dims, const FadingSource& fading) {
  const auto N = static_cast<Eigen::Index>(dims.n_bs_antennas);
  const auto M = static_cast<Eigen::Index>(dims.n_irs_elements);
  const auto NJ = static_cast<Eigen::Index>(dims.n_jammer_antennas);
  if (N < 1 || M < 1 || NJ < 1) throw std::domain_error("generate_channels: empty dimension");

  ChannelSet ch;
  const double amp_br = std::sqrt(pathloss_gain(distance(geom.bs, geom.irs), cfg.beta_br, cfg));
  ch.g_bs_irs = amp_br * fading(M, N);
  const std::size_t K = geom.n_ues();
  ch.g_bs_ue.reserve(K);
  ch.g_irs_ue.reserve(K);
  ch.g_jam_ue.reserve(K);
  for (const Point& ue : geom.ues) {
    const double amp_bu = std::sqrt(pathloss_gain(distance(geom.bs, ue), cfg.beta_bu, cfg));
    const double amp_ru = std::sqrt(pathloss_gain(distance(geom.irs, ue), cfg.beta_ru, cfg));
    const double amp_ju = std::sqrt(pathloss_gain(distance(geom.jammer, ue), cfg.beta_ju, cfg));
    ch.g_bs_ue.emplace_back(amp_bu * fading(N, 1).col(0));
    ch.g_irs_ue.emplace_back(amp_ru * fading(M, 1).col(0));
    ch.g_jam_ue.emplace_back(amp_ju * fading(NJ, 1).col(0));
  }
  return ch;
}

inline ChannelSet generate_channels(const Geometry& geom, const PathlossConfig& cfg,
                                    const ChannelDims& dims, Rng& rng) {
  return generate_channels(geom, cfg, dims,
                           [&rng](Eigen::Index r, Eigen::Index c) { return sample_fading(r, c, rng); });
}

// Diagonal IRS reflection matrix with unit amplitudes; only the phases are
// stored, so |Phi_m| = 1 holds by construction.
class PhaseShiftMatrix {
 public:
  PhaseShiftMatrix() = default;
  explicit PhaseShiftMatrix(std::size_t n_elements) : thetas_(n_elements, 0.0) {}
  explicit PhaseShiftMatrix(std::vector<double> thetas) : thetas_(std::move(thetas)) {
    for (double t : thetas_) check(t);
  }

  std::size_t size() const { return thetas_.size(); }
  double theta(std::size_t m) const { return thetas_.at(m); }
  std::span<const double> thetas() const { return thetas_; }
  double amplitude(std::size_t) const { return 1.0; }
  Complex coefficient(std::size_t m) const { return std::polar(1.0, thetas_.at(m)); }

  void set_theta(std::size_t m, double theta) {
    check(theta);
    thetas_.at(m) = theta;
  }

  friend bool operator==(const PhaseShiftMatrix&, const PhaseShiftMatrix&) = default;

 private:
  static void check(double t) {
    if (!(t >= 0.0 && t <= kTwoPi))
      throw std::domain_error("PhaseShiftMatrix: theta must lie in [0, 2*pi]");
  }
  std::vector<double> thetas_;
};

// h_k^H = g_ru,k^H Phi G + g_bu,k^H, a 1 x N row.
inline CRowVector effective_channel(std::size_t k, const PhaseShiftMatrix& phi, const ChannelSet& ch) {
  if (k >= ch.n_ues()) throw std::out_of_range("effective_channel: UE index out of range");
  if (phi.size() != ch.n_irs_elements())
    throw std::invalid_argument("effective_channel: phase profile length != M");
  CRowVector reflected(ch.g_irs_ue[k].size());
  for (Eigen::Index m = 0; m < reflected.size(); ++m)
    reflected(m) = std::conj(ch.g_irs_ue[k](m)) * phi.coefficient(static_cast<std::size_t>(m));
  return reflected * ch.g_bs_irs + ch.g_bs_ue[k].adjoint();
}

// Direct link only, for a system without an IRS.
inline CRowVector direct_channel(std::size_t k, const ChannelSet& ch) {
  if (k >= ch.n_ues()) throw std::out_of_range("direct_channel: UE index out of range");
  return ch.g_bs_ue[k].adjoint();
}

}  // namespace irsaj
