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

// Decision makers for the BS: the tabular learners (WoLF-PHC and plain
// Q-learning) and the two model-based baselines (one-step greedy over the
// joint action space, optimal power allocation without an IRS).

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irsaj/common.hpp"
#include "irsaj/discretization.hpp"
#include "irsaj/environment.hpp"
#include "irsaj/tabular.hpp"

namespace irsaj {

enum class Approach { wolf_phc, fast_q, greedy, no_irs, random };

inline std::string_view to_string(Approach a) {
  switch (a) {
    case Approach::wolf_phc: return "wolf-phc";
    case Approach::fast_q: return "fast-q";
    case Approach::greedy: return "greedy";
    case Approach::no_irs: return "no-irs";
    case Approach::random: return "random";
  }
  return "?";
}

inline Approach parse_approach(std::string_view s) {
  if (s == "wolf-phc") return Approach::wolf_phc;
  if (s == "fast-q") return Approach::fast_q;
  if (s == "greedy") return Approach::greedy;
  if (s == "no-irs") return Approach::no_irs;
  if (s == "random") return Approach::random;
  throw ConfigError("approaches", "unknown approach '" + std::string(s) +
                                      "' (expected wolf-phc, fast-q, greedy, no-irs or random)");
}

// How the WoLF-PHC learner picks actions while training: sample the mixed
// policy, sample it but play a uniform action with probability epsilon, or
// act epsilon-greedily on Q.
enum class Selection { policy, policy_epsilon, epsilon_greedy };

inline std::string_view to_string(Selection s) {
  switch (s) {
    case Selection::policy: return "policy";
    case Selection::policy_epsilon: return "policy-epsilon";
    case Selection::epsilon_greedy: return "epsilon-greedy";
  }
  return "?";
}

inline Selection parse_selection(std::string_view s) {
  if (s == "policy") return Selection::policy;
  if (s == "policy-epsilon") return Selection::policy_epsilon;
  if (s == "epsilon-greedy") return Selection::epsilon_greedy;
  throw ConfigError("agent.selection",
                    "expected policy, policy-epsilon or epsilon-greedy, got '" + std::string(s) + "'");
}

struct AgentParams {
  double alpha = 5e-3;
  double gamma = 0.9;
  double epsilon = 0.1;
  double delta_win = 0.04;
  double delta_lose = 0.16;
  // Multiplicative learning-rate decay applied at each episode start.
  double alpha_decay = 1.0;
  Selection selection = Selection::policy;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("agent.alpha", "must be in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("agent.gamma", "must be in (0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("agent.epsilon", "must be in [0, 1]");
    if (!(delta_win > 0.0 && delta_win <= 1.0)) throw ConfigError("agent.xi", "must be in (0, 1]");
    if (!(delta_lose >= delta_win && delta_lose <= 1.0))
      throw ConfigError("agent.delta_lose", "must be in [xi, 1]");
    if (!(alpha_decay > 0.0 && alpha_decay <= 1.0)) throw ConfigError("agent.alpha_decay", "must be in (0, 1]");
  }
};

// Index of the best score; scores within a relative 1e-12 of the best count
// as ties and resolve to the lowest index.
class TieAwareMax {
 public:
  void offer(std::size_t index, double score) {
    if (!found_ || score > best_ + tol(score)) {
      found_ = true;
      best_ = score;
      index_ = index;
    } else if (std::abs(score - best_) <= tol(score) && index < index_) {
      index_ = index;
    }
  }
  std::size_t index() const { return index_; }
  double score() const { return best_; }

 private:
  double tol(double s) const { return 1e-12 * std::max({1.0, std::abs(s), std::abs(best_)}); }
  bool found_ = false;
  double best_ = 0.0;
  std::size_t index_ = 0;
};

// Optimal transmit powers over the feasible discrete grid for a cell with
// no IRS (direct links only), maximizing the sum rate.
struct NoIrsChoice {
  std::size_t power_combo = 0;
  PowerAllocation power;
  double rate = 0.0;
};

inline NoIrsChoice optimal_pa_no_irs(const ChannelSet& ch, const TransmitBeamformers& w, const JammerAction& jam,
                                     double noise, const ActionCodec& codec) {
  TieAwareMax best;
  const PhaseShiftMatrix unused(ch.n_irs_elements());
  for (std::size_t c = 0; c < codec.n_power_combos(); ++c) {
    const PowerAllocation pa = codec.power_allocation(c);
    best.offer(c, system_rate(pa, unused, w, jam, ch, noise, LinkMode::direct_only));
  }
  return {best.index(), codec.power_allocation(best.index()), best.score()};
}

// One-step greedy over the whole joint action space, scoring each action by
// its immediate reward against the current channels and assuming the
// jammer repeats its previous action. Group-summed link coefficients are
// cached per coherence block.
class GreedyBaseline {
 public:
  explicit GreedyBaseline(const ActionCodec& codec) : codec_(&codec) {}

  ActionIndex choose(const Environment& env) {
    refresh(env);
    const std::size_t K = env.n_ues();
    const auto jam_rx = env.received_jamming(env.previous_jam());
    const auto& cfg = env.config();
    std::vector<double> sinrs(K);
    TieAwareMax best;
    for (std::size_t p = 0; p < codec_->n_phase_configs(); ++p) {
      const std::span<const double> gains(gains_.data() + p * K * K, K * K);
      for (std::size_t c = 0; c < codec_->n_power_combos(); ++c) {
        const PowerAllocation& pa = powers_[c];
        sinrs_from_gains(gains, pa.powers, jam_rx, env.noise_w(), sinrs);
        const double r = reward(rate_of(sinrs), pa, cfg.lambda1, cfg.reward_power_unit);
        best.offer(codec_->compose(c, p), r);
      }
    }
    return best.index();
  }

 private:
  void refresh(const Environment& env) {
    if (cached_block_ == env.block_id()) return;
    cached_block_ = env.block_id();
    const std::size_t K = env.n_ues();
    const std::size_t G = codec_->n_groups();
    const LinkCoefficients& links = env.links();
    const bool irs = env.link_mode() == LinkMode::with_irs;

    std::vector<Complex> group_sums(K * K * G, Complex{});
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t i = 0; i < K; ++i) {
        const CVector& c = links.cascade(k, i);
        for (std::size_t m = 0; m < codec_->n_elements(); ++m)
          group_sums[(k * K + i) * G + codec_->group_of(m)] += c(static_cast<Eigen::Index>(m));
      }

    std::vector<Complex> phasors(codec_->phase_levels());
    for (std::size_t l = 0; l < phasors.size(); ++l) phasors[l] = std::polar(1.0, codec_->phase_angle(l));

    gains_.assign(codec_->n_phase_configs() * K * K, 0.0);
    std::vector<std::size_t> digits(G, 0);
    for (std::size_t p = 0; p < codec_->n_phase_configs(); ++p) {
      std::size_t rest = p;
      for (std::size_t g = 0; g < G; ++g) {
        digits[g] = rest % codec_->phase_levels();
        rest /= codec_->phase_levels();
      }
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < K; ++i) {
          Complex a = links.direct(k, i);
          if (irs)
            for (std::size_t g = 0; g < G; ++g) a += group_sums[(k * K + i) * G + g] * phasors[digits[g]];
          gains_[p * K * K + k * K + i] = std::norm(a);
        }
    }
    if (powers_.empty())
      for (std::size_t c = 0; c < codec_->n_power_combos(); ++c) powers_.push_back(codec_->power_allocation(c));
  }

  const ActionCodec* codec_;
  std::uint64_t cached_block_ = 0;
  std::vector<double> gains_;
  std::vector<PowerAllocation> powers_;
};

inline ActionIndex greedy_baseline(const Environment& env, const ActionCodec& codec) {
  GreedyBaseline g(codec);
  return g.choose(env);
}

// Tabular learner shared by WoLF-PHC and the fast Q-learning baseline; the
// two differ only in how actions are selected and whether a mixed policy
// is maintained.
class TabularAgent {
 public:
  TabularAgent(Approach kind, std::size_t n_states, std::size_t n_actions, AgentParams params, Rng rng)
      : kind_(kind), params_(params), q_(n_states, n_actions, params.alpha, params.gamma), rng_(std::move(rng)) {
    params_.validate();
    if (kind != Approach::wolf_phc && kind != Approach::fast_q)
      throw std::invalid_argument("TabularAgent: only wolf-phc and fast-q learn a table");
    if (kind == Approach::wolf_phc) policy_ = MixedPolicy(n_states, n_actions, params.delta_win, params.delta_lose);
  }

  Approach kind() const { return kind_; }
  const AgentParams& params() const { return params_; }
  const QTable& q() const { return q_; }
  QTable& q() { return q_; }
  const MixedPolicy& policy() const { return policy_; }
  MixedPolicy& policy() { return policy_; }
  const Rng& rng() const { return rng_; }
  Rng& rng() { return rng_; }

  ActionIndex select(StateIndex s) {
    if (kind_ == Approach::wolf_phc && params_.selection == Selection::policy)
      return sample_action(policy_.probs(s), rng_);
    if (kind_ == Approach::wolf_phc && params_.selection == Selection::policy_epsilon) {
      if (uniform01(rng_) < params_.epsilon) return uniform_index(rng_, q_.n_actions());
      return sample_action(policy_.probs(s), rng_);
    }
    return epsilon_greedy(q_.row(s), params_.epsilon, rng_);
  }

  void learn(StateIndex s, ActionIndex a, double r, StateIndex s_next) {
    q_update(q_, s, a, r, s_next);
    if (kind_ == Approach::wolf_phc) {
      ++policy_.visits(s);
      wolf_phc_step(policy_, s, q_.row(s));
    }
  }

  void end_episode() {
    if (params_.alpha_decay < 1.0) q_.set_alpha(q_.alpha() * params_.alpha_decay);
  }

  // Action the trained model would play in state s.
  ActionIndex exploit(StateIndex s) const {
    return kind_ == Approach::wolf_phc ? argmax(policy_.probs(s)) : argmax(q_.row(s));
  }

  friend bool operator==(const TabularAgent& a, const TabularAgent& b) {
    return a.kind_ == b.kind_ && a.q_ == b.q_ && a.policy_ == b.policy_ && a.rng_ == b.rng_ &&
           a.params_.alpha == b.params_.alpha && a.params_.gamma == b.params_.gamma &&
           a.params_.epsilon == b.params_.epsilon && a.params_.delta_win == b.params_.delta_win &&
           a.params_.delta_lose == b.params_.delta_lose && a.params_.alpha_decay == b.params_.alpha_decay &&
           a.params_.selection == b.params_.selection;
  }

 private:
  Approach kind_;
  AgentParams params_;
  QTable q_;
  MixedPolicy policy_;
  Rng rng_;
};

}  // namespace irsaj
