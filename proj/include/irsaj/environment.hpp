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

// Downlink physics (SINR, sum rate, reward) and the step dynamics of the
// jammed IRS-assisted cell.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SVD>

#include "irsaj/channel.hpp"
#include "irsaj/common.hpp"
#include "irsaj/jammer.hpp"

namespace irsaj {

struct PowerAllocation {
  std::vector<double> powers;  // watts
  double p_max = 0.0;          // watts

  double total() const { return std::accumulate(powers.begin(), powers.end(), 0.0); }

  bool feasible() const {
    return std::all_of(powers.begin(), powers.end(), [](double p) { return p >= 0.0; }) &&
           total() <= p_max * (1.0 + 1e-12);
  }

  friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;
};

struct TransmitBeamformers {
  std::vector<CVector> w;  // one unit-norm vector per UE
};

// Principal right-singular direction of G: the unit vector that maximizes
// ||G w||, shared by every UE. The global phase is pinned so the largest
// entry is real and positive.
inline TransmitBeamformers transmit_beamformer(const ChannelSet& ch) {
  if (!(ch.g_bs_irs.norm() > 0.0)) throw DegenerateChannelError("transmit_beamformer: G is zero");
  Eigen::JacobiSVD<CMatrix> svd(ch.g_bs_irs, Eigen::ComputeThinV);
  CVector v = svd.matrixV().col(0);
  Eigen::Index pivot = 0;
  v.cwiseAbs().maxCoeff(&pivot);
  v *= std::polar(1.0, -std::arg(v(pivot)));
  v.normalize();
  return TransmitBeamformers{std::vector<CVector>(ch.n_ues(), v)};
}

enum class LinkMode { with_irs, direct_only };

inline CRowVector composite_channel(std::size_t k, const PhaseShiftMatrix& phi, const ChannelSet& ch,
                                    LinkMode mode) {
  return mode == LinkMode::with_irs ? effective_channel(k, phi, ch) : direct_channel(k, ch);
}

// Received jamming power at UE k: P_J,k |h_J,k^H z_k|^2.
inline double jamming_power_at(std::size_t k, const JammerAction& jam, const ChannelSet& ch) {
  if (jam.jam_powers.size() != ch.n_ues() || jam.jam_vectors.size() != ch.n_ues())
    throw std::invalid_argument("jamming_power_at: jammer action has wrong UE count");
  return jam.jam_powers[k] * std::norm(ch.g_jam_ue[k].dot(jam.jam_vectors[k]));
}

inline double compute_sinr(std::size_t k, const PowerAllocation& pa, const PhaseShiftMatrix& phi,
                           const TransmitBeamformers& w, const JammerAction& jam, const ChannelSet& ch,
                           double noise, LinkMode mode = LinkMode::with_irs) {
  if (!(noise > 0.0)) throw std::domain_error("compute_sinr: noise power must be > 0");
  if (k >= ch.n_ues()) throw std::out_of_range("compute_sinr: UE index out of range");
  if (pa.powers.size() != ch.n_ues() || w.w.size() != ch.n_ues())
    throw std::invalid_argument("compute_sinr: allocation/beamformer size != K");
  const CRowVector h = composite_channel(k, phi, ch, mode);
  double interference = 0.0;
  for (std::size_t i = 0; i < ch.n_ues(); ++i)
    if (i != k) interference += pa.powers[i] * std::norm((h * w.w[i])(0));
  const double desired = pa.powers[k] * std::norm((h * w.w[k])(0));
  return desired / (interference + jamming_power_at(k, jam, ch) + noise);
}

inline double rate_of(std::span<const double> sinrs) {
  double r = 0.0;
  for (double s : sinrs) r += std::log2(1.0 + s);
  return r;
}

inline double system_rate(const PowerAllocation& pa, const PhaseShiftMatrix& phi, const TransmitBeamformers& w,
                          const JammerAction& jam, const ChannelSet& ch, double noise,
                          LinkMode mode = LinkMode::with_irs) {
  std::vector<double> sinrs(ch.n_ues());
  for (std::size_t k = 0; k < ch.n_ues(); ++k) sinrs[k] = compute_sinr(k, pa, phi, w, jam, ch, noise, mode);
  return rate_of(sinrs);
}

// Unit in which the power cost of the reward is expressed.
enum class PowerUnit { watt, milliwatt, normalized };

inline std::string_view to_string(PowerUnit u) {
  switch (u) {
    case PowerUnit::watt: return "W";
    case PowerUnit::milliwatt: return "mW";
    case PowerUnit::normalized: return "normalized";
  }
  return "?";
}

inline PowerUnit parse_power_unit(std::string_view s) {
  if (s == "W") return PowerUnit::watt;
  if (s == "mW") return PowerUnit::milliwatt;
  if (s == "normalized") return PowerUnit::normalized;
  throw ConfigError("environment.reward_power_unit", "expected W, mW or normalized, got '" + std::string(s) + "'");
}

inline double power_in_unit(double watts, double p_max, PowerUnit unit) {
  switch (unit) {
    case PowerUnit::watt: return watts;
    case PowerUnit::milliwatt: return watts * 1e3;
    case PowerUnit::normalized: return watts / p_max;
  }
  return watts;
}

// r = rate - lambda1 * sum_k P_k.
inline double reward(double rate, const PowerAllocation& pa, double lambda1, PowerUnit unit = PowerUnit::watt) {
  if (!(lambda1 >= 0.0)) throw std::domain_error("reward: lambda1 must be >= 0");
  return rate - lambda1 * power_in_unit(pa.total(), pa.p_max, unit);
}

// ---------------------------------------------------------------------------
// Per-coherence-block link scalars. With a fixed beamformer the composite
// amplitude h_k^H w_i is affine in the IRS coefficients:
//   h_k^H w_i = direct(k,i) + sum_m e^{j theta_m} cascade(k,i)[m].

class LinkCoefficients {
 public:
  LinkCoefficients() = default;
  LinkCoefficients(const ChannelSet& ch, const TransmitBeamformers& w)
      : n_ues_(ch.n_ues()), n_elements_(ch.n_irs_elements()) {
    direct_.resize(n_ues_ * n_ues_);
    cascade_.resize(n_ues_ * n_ues_);
    for (std::size_t i = 0; i < n_ues_; ++i) {
      const CVector at_irs = ch.g_bs_irs * w.w[i];
      for (std::size_t k = 0; k < n_ues_; ++k) {
        direct_[k * n_ues_ + i] = ch.g_bs_ue[k].dot(w.w[i]);
        cascade_[k * n_ues_ + i] = ch.g_irs_ue[k].conjugate().cwiseProduct(at_irs);
      }
    }
  }

  std::size_t n_ues() const { return n_ues_; }
  std::size_t n_elements() const { return n_elements_; }
  Complex direct(std::size_t k, std::size_t i) const { return direct_[k * n_ues_ + i]; }
  const CVector& cascade(std::size_t k, std::size_t i) const { return cascade_[k * n_ues_ + i]; }

  Complex amplitude(std::size_t k, std::size_t i, const PhaseShiftMatrix& phi, LinkMode mode) const {
    Complex a = direct(k, i);
    if (mode == LinkMode::direct_only) return a;
    const CVector& c = cascade(k, i);
    for (std::size_t m = 0; m < n_elements_; ++m) a += c(static_cast<Eigen::Index>(m)) * phi.coefficient(m);
    return a;
  }

  // gains[k * K + i] = |h_k^H w_i|^2
  std::vector<double> gains(const PhaseShiftMatrix& phi, LinkMode mode) const {
    std::vector<double> g(n_ues_ * n_ues_);
    for (std::size_t k = 0; k < n_ues_; ++k)
      for (std::size_t i = 0; i < n_ues_; ++i) g[k * n_ues_ + i] = std::norm(amplitude(k, i, phi, mode));
    return g;
  }

 private:
  std::size_t n_ues_ = 0;
  std::size_t n_elements_ = 0;
  std::vector<Complex> direct_;
  std::vector<CVector> cascade_;
};

// SINRs from precomputed gains |h_k^H w_i|^2 and received jamming powers.
inline void sinrs_from_gains(std::span<const double> gains, std::span<const double> powers,
                             std::span<const double> jam_rx, double noise, std::span<double> out) {
  const std::size_t K = powers.size();
  for (std::size_t k = 0; k < K; ++k) {
    double interference = jam_rx[k] + noise;
    for (std::size_t i = 0; i < K; ++i)
      if (i != k) interference += powers[i] * gains[k * K + i];
    out[k] = powers[k] * gains[k * K + k] / interference;
  }
}

// ---------------------------------------------------------------------------

struct RawObservation {
  std::vector<double> prev_jam_powers;     // watts, as estimated by the BS
  std::vector<double> prev_sinrs;          // linear
  std::vector<double> channel_magnitudes;  // |h_k^H w_k| under the last applied phases
  double noise_power = 0.0;                // watts

  bool valid() const {
    auto ok = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x >= 0.0; });
    };
    return ok(prev_jam_powers) && ok(prev_sinrs) && ok(channel_magnitudes) && std::isfinite(noise_power) &&
           noise_power >= 0.0;
  }
};

struct StepOutcome {
  std::vector<double> sinrs;
  double rate = 0.0;
  double reward = 0.0;
  double sum_power = 0.0;  // watts
  JammerAction jam;
  RawObservation next_observation;
};

struct EnvironmentConfig {
  ChannelDims dims;
  double p_max_dbm = 30.0;
  double noise_dbm = -100.0;
  double lambda1 = 1.0;
  PowerUnit reward_power_unit = PowerUnit::watt;
  bool irs_enabled = true;
  // Relative std of the BS's estimate of last step's jamming powers.
  double jam_estimate_noise = 0.0;

  double p_max_w() const { return dbm_to_watts(p_max_dbm); }
  double noise_w() const { return dbm_to_watts(noise_dbm); }

  void validate() const {
    if (dims.n_bs_antennas < 1) throw ConfigError("environment.n_bs_antennas", "must be >= 1");
    if (dims.n_irs_elements < 1) throw ConfigError("environment.n_irs_elements", "must be >= 1");
    if (dims.n_jammer_antennas < 1) throw ConfigError("environment.n_jammer_antennas", "must be >= 1");
    if (!std::isfinite(p_max_dbm)) throw ConfigError("environment.p_max_dbm", "must be finite");
    if (!std::isfinite(noise_dbm)) throw ConfigError("environment.noise_dbm", "must be finite");
    if (!(lambda1 >= 0.0)) throw ConfigError("environment.lambda1", "must be >= 0");
    if (!(jam_estimate_noise >= 0.0)) throw ConfigError("environment.jam_estimate_noise", "must be >= 0");
  }
};

// One cell: channels held fixed within an episode, a jammer that reacts to
// the previous step, and the bookkeeping behind the agent's observation.
class Environment {
 public:
  Environment(EnvironmentConfig cfg, Geometry geom, PathlossConfig pathloss, JammerConfig jammer_cfg,
              std::uint64_t seed)
      : cfg_(std::move(cfg)), geom_(std::move(geom)), pathloss_(pathloss),
        jammer_(std::move(jammer_cfg), geom_.n_ues()), channel_rng_(make_rng(seed, Stream::channels)),
        jammer_rng_(make_rng(seed, Stream::jammer)), estimator_rng_(make_rng(seed, Stream::estimator)),
        prev_phi_(cfg_.dims.n_irs_elements) {
    cfg_.validate();
    geom_.validate();
    pathloss_.validate();
    const std::size_t K = geom_.n_ues();
    prev_jam_.jam_powers.assign(K, 0.0);
    prev_jam_.jam_vectors.assign(K, CVector::Zero(static_cast<Eigen::Index>(cfg_.dims.n_jammer_antennas)));
    prev_sinrs_.assign(K, 0.0);
    obs_.prev_jam_powers.assign(K, 0.0);
    obs_.prev_sinrs.assign(K, 0.0);
    obs_.noise_power = cfg_.noise_w();
    begin_episode();
  }

  // Redraws the small-scale fading (new coherence block).
  void begin_episode() {
    set_channels(generate_channels(geom_, pathloss_, cfg_.dims, channel_rng_));
  }

  // Installs an externally built coherence block.
  void set_channels(ChannelSet ch) {
    if (!ch.consistent() || ch.n_ues() != geom_.n_ues() || ch.n_irs_elements() != cfg_.dims.n_irs_elements)
      throw std::invalid_argument("Environment::set_channels: channel dimensions disagree with config");
    channels_ = std::move(ch);
    beams_ = transmit_beamformer(channels_);
    links_ = LinkCoefficients(channels_, beams_);
    ++block_id_;
    obs_.channel_magnitudes = channel_magnitudes(prev_phi_);
  }

  const EnvironmentConfig& config() const { return cfg_; }
  const Geometry& geometry() const { return geom_; }
  const ChannelSet& channels() const { return channels_; }
  const TransmitBeamformers& beamformers() const { return beams_; }
  const LinkCoefficients& links() const { return links_; }
  const JammerPolicy& jammer() const { return jammer_; }
  const JammerAction& previous_jam() const { return prev_jam_; }
  const RawObservation& observation() const { return obs_; }
  std::uint64_t block_id() const { return block_id_; }
  std::size_t n_ues() const { return geom_.n_ues(); }
  double noise_w() const { return obs_.noise_power; }
  LinkMode link_mode() const { return cfg_.irs_enabled ? LinkMode::with_irs : LinkMode::direct_only; }

  std::vector<double> received_jamming(const JammerAction& jam) const {
    std::vector<double> out(n_ues());
    for (std::size_t k = 0; k < n_ues(); ++k) out[k] = jamming_power_at(k, jam, channels_);
    return out;
  }

  struct Evaluation {
    std::vector<double> sinrs;
    double rate = 0.0;
    double reward = 0.0;
  };

  // Side-effect free evaluation against the current channels.
  Evaluation evaluate(const PowerAllocation& pa, const PhaseShiftMatrix& phi, const JammerAction& jam) const {
    check_action(pa, phi);
    Evaluation ev;
    ev.sinrs.resize(n_ues());
    const auto gains = links_.gains(phi, link_mode());
    const auto jam_rx = received_jamming(jam);
    sinrs_from_gains(gains, pa.powers, jam_rx, noise_w(), ev.sinrs);
    ev.rate = rate_of(ev.sinrs);
    ev.reward = reward(ev.rate, pa, cfg_.lambda1, cfg_.reward_power_unit);
    return ev;
  }

  StepOutcome step(const PowerAllocation& pa, const PhaseShiftMatrix& phi) {
    check_action(pa, phi);
    StepOutcome out;
    out.jam = jammer_.decide(prev_sinrs_, channels_, jammer_rng_);
    Evaluation ev = evaluate(pa, phi, out.jam);
    jammer_.learn(ev.rate, ev.sinrs);

    out.sinrs = std::move(ev.sinrs);
    out.rate = ev.rate;
    out.reward = ev.reward;
    out.sum_power = pa.total();

    prev_sinrs_ = out.sinrs;
    prev_jam_ = out.jam;
    prev_phi_ = phi;
    obs_.prev_sinrs = out.sinrs;
    obs_.prev_jam_powers = estimate_jam_powers(out.jam);
    obs_.channel_magnitudes = channel_magnitudes(prev_phi_);
    out.next_observation = obs_;
    return out;
  }

 private:
  void check_action(const PowerAllocation& pa, const PhaseShiftMatrix& phi) const {
    if (pa.powers.size() != n_ues() || phi.size() != cfg_.dims.n_irs_elements)
      throw std::logic_error("Environment: action dimensions disagree with the cell");
    if (!pa.feasible() || pa.p_max > cfg_.p_max_w() * (1.0 + 1e-12))
      throw std::logic_error("Environment: infeasible power allocation reached the physics (codec bug)");
  }

  std::vector<double> channel_magnitudes(const PhaseShiftMatrix& phi) const {
    std::vector<double> mags(n_ues());
    for (std::size_t k = 0; k < n_ues(); ++k) mags[k] = std::abs(links_.amplitude(k, k, phi, link_mode()));
    return mags;
  }

  std::vector<double> estimate_jam_powers(const JammerAction& jam) {
    std::vector<double> est = jam.jam_powers;
    if (cfg_.jam_estimate_noise > 0.0)
      for (double& p : est) {
        const double e = cfg_.jam_estimate_noise * complex_normal(estimator_rng_).real() * std::sqrt(2.0);
        p *= std::max(0.0, 1.0 + e);
      }
    return est;
  }

  EnvironmentConfig cfg_;
  Geometry geom_;
  PathlossConfig pathloss_;
  JammerPolicy jammer_;
  Rng channel_rng_;
  Rng jammer_rng_;
  Rng estimator_rng_;

  ChannelSet channels_;
  TransmitBeamformers beams_;
  LinkCoefficients links_;
  std::uint64_t block_id_ = 0;

  PhaseShiftMatrix prev_phi_;
  JammerAction prev_jam_;
  std::vector<double> prev_sinrs_;
  RawObservation obs_;
};

}  // namespace irsaj
