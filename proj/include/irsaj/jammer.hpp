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

// Multi-antenna jammer: per-UE jamming directions and powers, and the
// behaviors that choose them.

#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irsaj/channel.hpp"
#include "irsaj/common.hpp"
#include "irsaj/tabular.hpp"

namespace irsaj {

enum class JammerKind { fixed, sweep, reactive, q_learning };
enum class JamVectorMode { matched, random };

inline std::string_view to_string(JammerKind k) {
  switch (k) {
    case JammerKind::fixed: return "fixed";
    case JammerKind::sweep: return "sweep";
    case JammerKind::reactive: return "reactive";
    case JammerKind::q_learning: return "q-learning";
  }
  return "?";
}

inline JammerKind parse_jammer_kind(std::string_view s) {
  if (s == "fixed") return JammerKind::fixed;
  if (s == "sweep") return JammerKind::sweep;
  if (s == "reactive") return JammerKind::reactive;
  if (s == "q-learning") return JammerKind::q_learning;
  throw ConfigError("jammer.kind", "unknown jammer kind '" + std::string(s) + "'");
}

inline std::string_view to_string(JamVectorMode m) {
  return m == JamVectorMode::matched ? "matched" : "random";
}

inline JamVectorMode parse_jam_vector_mode(std::string_view s) {
  if (s == "matched") return JamVectorMode::matched;
  if (s == "random") return JamVectorMode::random;
  throw ConfigError("jammer.vector_mode", "unknown jam vector mode '" + std::string(s) + "'");
}

// Jamming powers enter the SINR as separate scalars; the vectors are unit norm.
struct JammerAction {
  std::vector<double> jam_powers;
  std::vector<CVector> jam_vectors;

  double total_power() const { return std::accumulate(jam_powers.begin(), jam_powers.end(), 0.0); }
};

struct JammerConfig {
  JammerKind kind = JammerKind::q_learning;
  // Per-step budget for the fixed, sweep and reactive behaviors.
  double power_dbm = 30.0;
  // Discrete levels the learning jammer picks from.
  std::vector<double> power_grid_dbm{15.0, 20.0, 25.0, 30.0, 35.0, 40.0};
  double min_power_dbm = 15.0;
  double max_power_dbm = 40.0;
  JamVectorMode vector_mode = JamVectorMode::matched;
  double alpha = 0.1;
  double gamma = 0.5;
  double epsilon = 0.1;

  void validate() const {
    if (!(min_power_dbm <= max_power_dbm))
      throw ConfigError("jammer.min_power_dbm", "must not exceed max_power_dbm");
    if (power_dbm < min_power_dbm || power_dbm > max_power_dbm)
      throw ConfigError("jammer.power_dbm", "outside the jammer power range");
    if (power_grid_dbm.empty()) throw ConfigError("jammer.power_grid_dbm", "must not be empty");
    for (double p : power_grid_dbm)
      if (p < min_power_dbm || p > max_power_dbm)
        throw ConfigError("jammer.power_grid_dbm", "level outside the jammer power range");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("jammer.alpha", "must be in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("jammer.gamma", "must be in (0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("jammer.epsilon", "must be in [0, 1]");
  }
};

// Unit-norm jamming direction toward UE k: matched to h_J,k, or isotropic.
inline CVector jam_vector(JamVectorMode mode, std::size_t k, const ChannelSet& ch, Rng& rng) {
  if (k >= ch.n_ues()) throw std::out_of_range("jam_vector: UE index out of range");
  CVector z;
  if (mode == JamVectorMode::matched) {
    z = ch.g_jam_ue[k];
  } else {
    z.resize(static_cast<Eigen::Index>(ch.n_jammer_antennas()));
    for (auto& v : z) v = complex_normal(rng);
  }
  const double norm = z.norm();
  if (!(norm > 0.0)) throw DegenerateChannelError("jam_vector: zero jammer channel");
  return z / norm;
}

// Index of the largest entry, lowest index on ties.
inline std::size_t strongest(std::span<const double> values) {
  return values.empty() ? 0 : argmax(values);
}

// Stateful jamming behavior. The jammer sees the SINRs of the previous step
// (e.g. by overhearing link adaptation), never the BS's current decision.
class JammerPolicy {
 public:
  JammerPolicy(JammerConfig cfg, std::size_t n_ues) : cfg_(std::move(cfg)), n_ues_(n_ues) {
    cfg_.validate();
    if (n_ues == 0) throw ConfigError("geometry.n_ues", "jammer needs at least one UE");
    if (cfg_.kind == JammerKind::q_learning)
      q_ = QTable(n_ues * n_ues, n_ues * cfg_.power_grid_dbm.size(), cfg_.alpha, cfg_.gamma);
  }

  const JammerConfig& config() const { return cfg_; }
  const QTable& q_table() const { return q_; }
  std::size_t n_ues() const { return n_ues_; }

  std::size_t n_states() const { return n_ues_ * n_ues_; }
  std::size_t n_actions() const { return n_ues_ * cfg_.power_grid_dbm.size(); }

  // (own previous target, UE with the strongest previous SINR)
  StateIndex state_of(std::size_t prev_target, std::span<const double> prev_sinrs) const {
    return prev_target * n_ues_ + std::min(strongest(prev_sinrs), n_ues_ - 1);
  }

  JammerAction decide(std::span<const double> prev_sinrs, const ChannelSet& ch, Rng& rng) {
    if (ch.n_ues() != n_ues_) throw std::invalid_argument("JammerPolicy: UE count mismatch");
    std::vector<double> powers(n_ues_, 0.0);
    switch (cfg_.kind) {
      case JammerKind::fixed: {
        const double each = dbm_to_watts(cfg_.power_dbm) / static_cast<double>(n_ues_);
        std::fill(powers.begin(), powers.end(), each);
        target_ = 0;
        break;
      }
      case JammerKind::sweep:
        target_ = static_cast<std::size_t>(step_ % n_ues_);
        powers[target_] = dbm_to_watts(cfg_.power_dbm);
        break;
      case JammerKind::reactive:
        target_ = std::min(strongest(prev_sinrs), n_ues_ - 1);
        powers[target_] = dbm_to_watts(cfg_.power_dbm);
        break;
      case JammerKind::q_learning: {
        last_state_ = state_of(target_, prev_sinrs);
        last_action_ = epsilon_greedy(q_.row(last_state_), cfg_.epsilon, rng);
        target_ = last_action_ / cfg_.power_grid_dbm.size();
        powers[target_] = dbm_to_watts(cfg_.power_grid_dbm[last_action_ % cfg_.power_grid_dbm.size()]);
        break;
      }
    }
    ++step_;
    JammerAction act;
    act.jam_powers = std::move(powers);
    act.jam_vectors.reserve(n_ues_);
    for (std::size_t k = 0; k < n_ues_; ++k) act.jam_vectors.push_back(jam_vector(cfg_.vector_mode, k, ch, rng));
    return act;
  }

  // The learning jammer is rewarded with the negative system rate.
  void learn(double system_rate, std::span<const double> sinrs) {
    if (cfg_.kind != JammerKind::q_learning) return;
    q_update(q_, last_state_, last_action_, -system_rate, state_of(target_, sinrs));
  }

  bool within_power_range(const JammerAction& act) const {
    const double hi = dbm_to_watts(cfg_.max_power_dbm) * (1.0 + 1e-12);
    const double lo = dbm_to_watts(cfg_.min_power_dbm) * (1.0 - 1e-12);
    const double total = act.total_power();
    if (total < lo || total > hi) return false;
    return std::all_of(act.jam_powers.begin(), act.jam_powers.end(),
                       [hi](double p) { return p >= 0.0 && p <= hi; });
  }

 private:
  JammerConfig cfg_;
  std::size_t n_ues_;
  QTable q_;
  std::uint64_t step_ = 0;
  std::size_t target_ = 0;
  StateIndex last_state_ = 0;
  ActionIndex last_action_ = 0;
};

inline JammerAction jam_decide(JammerPolicy& policy, std::span<const double> prev_sinrs,
                               const ChannelSet& ch, Rng& rng) {
  return policy.decide(prev_sinrs, ch, rng);
}

}  // namespace irsaj
