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

// Tabular learning primitives: action-value table, epsilon-greedy selection,
// policy hill-climbing and its win-or-learn-fast variant.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "irsaj/common.hpp"

namespace irsaj {

// Lowest index among the maxima.
inline std::size_t argmax(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("argmax: empty row");
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

class QTable {
 public:
  QTable() = default;
  QTable(std::size_t n_states, std::size_t n_actions, double alpha, double gamma)
      : n_states_(n_states), n_actions_(n_actions), alpha_(alpha), gamma_(gamma),
        values_(n_states * n_actions, 0.0) {
    if (n_states == 0 || n_actions == 0) throw std::invalid_argument("QTable: empty table");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("QTable: alpha must be in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("QTable: gamma must be in (0, 1]");
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  void set_alpha(double alpha) { alpha_ = alpha; }

  std::span<const double> row(StateIndex s) const {
    check_state(s);
    return {values_.data() + s * n_actions_, n_actions_};
  }
  std::span<double> row(StateIndex s) {
    check_state(s);
    return {values_.data() + s * n_actions_, n_actions_};
  }
  double operator()(StateIndex s, ActionIndex a) const { return row(s)[check_action(a)]; }
  double& operator()(StateIndex s, ActionIndex a) { return row(s)[check_action(a)]; }

  double max_value(StateIndex s) const {
    const auto r = row(s);
    return *std::max_element(r.begin(), r.end());
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  void check_state(StateIndex s) const {
    if (s >= n_states_) throw std::out_of_range("QTable: state index out of range");
  }
  std::size_t check_action(ActionIndex a) const {
    if (a >= n_actions_) throw std::out_of_range("QTable: action index out of range");
    return a;
  }

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  double alpha_ = 5e-3;
  double gamma_ = 0.9;
  std::vector<double> values_;
};

// Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
inline double q_update(QTable& q, StateIndex s, ActionIndex a, double r, StateIndex s_next) {
  const double target = r + q.gamma() * q.max_value(s_next);
  double& entry = q(s, a);
  entry = (1.0 - q.alpha()) * entry + q.alpha() * target;
  return entry;
}

// Exploits the argmax with probability 1 - eps; otherwise picks uniformly
// among the other |A| - 1 actions.
inline ActionIndex epsilon_greedy(std::span<const double> q_row, double eps, Rng& rng) {
  if (q_row.empty()) throw std::invalid_argument("epsilon_greedy: empty row");
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon_greedy: eps must be in [0, 1]");
  const std::size_t best = argmax(q_row);
  if (q_row.size() < 2 || uniform01(rng) >= eps) return best;
  const std::size_t other = uniform_index(rng, q_row.size() - 1);
  return other < best ? other : other + 1;
}

// Inverse-CDF draw from a probability row.
inline ActionIndex sample_action(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("sample_action: empty row");
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return a;
  }
  // Rounding left u above the accumulated mass; fall back to the last
  // action that carries probability.
  for (std::size_t a = probs.size(); a-- > 0;)
    if (probs[a] > 0.0) return a;
  return probs.size() - 1;
}

// pi(s, best) += xi, every other action -= xi / (|A| - 1), then projected
// back onto the simplex by clamping to [0, 1] and renormalizing.
inline void phc_update(std::span<double> probs, std::size_t best, double xi) {
  if (probs.empty()) throw std::invalid_argument("phc_update: empty row");
  if (best >= probs.size()) throw std::out_of_range("phc_update: best action out of range");
  if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("phc_update: xi must be in (0, 1]");
  if (probs.size() == 1) {
    probs[0] = 1.0;
    return;
  }
  const double dec = xi / static_cast<double>(probs.size() - 1);
  double total = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    double p = probs[a] + (a == best ? xi : -dec);
    p = std::clamp(p, 0.0, 1.0);
    probs[a] = p;
    total += p;
  }
  for (double& p : probs) p /= total;
}

enum class WolfBranch { winning, losing };

// Current policy, running-average policy and per-state visit counters.
class MixedPolicy {
 public:
  MixedPolicy() = default;
  MixedPolicy(std::size_t n_states, std::size_t n_actions, double delta_win, double delta_lose)
      : n_states_(n_states), n_actions_(n_actions), delta_win_(delta_win), delta_lose_(delta_lose),
        probs_(n_states * n_actions, 1.0 / static_cast<double>(n_actions)),
        avg_probs_(probs_), visits_(n_states, 0) {
    if (n_states == 0 || n_actions == 0) throw std::invalid_argument("MixedPolicy: empty table");
    if (!(delta_win > 0.0 && delta_win <= delta_lose && delta_lose <= 1.0))
      throw std::invalid_argument("MixedPolicy: need 0 < delta_win <= delta_lose <= 1");
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double delta_win() const { return delta_win_; }
  double delta_lose() const { return delta_lose_; }

  std::span<double> probs(StateIndex s) { return slice(probs_, s); }
  std::span<const double> probs(StateIndex s) const { return slice(probs_, s); }
  std::span<double> avg_probs(StateIndex s) { return slice(avg_probs_, s); }
  std::span<const double> avg_probs(StateIndex s) const { return slice(avg_probs_, s); }
  std::uint64_t visits(StateIndex s) const { return visits_.at(s); }
  std::uint64_t& visits(StateIndex s) { return visits_.at(s); }

  const std::vector<double>& all_probs() const { return probs_; }
  std::vector<double>& all_probs() { return probs_; }
  const std::vector<double>& all_avg_probs() const { return avg_probs_; }
  std::vector<double>& all_avg_probs() { return avg_probs_; }
  const std::vector<std::uint64_t>& all_visits() const { return visits_; }
  std::vector<std::uint64_t>& all_visits() { return visits_; }

  friend bool operator==(const MixedPolicy&, const MixedPolicy&) = default;

 private:
  std::span<double> slice(std::vector<double>& v, StateIndex s) {
    check(s);
    return {v.data() + s * n_actions_, n_actions_};
  }
  std::span<const double> slice(const std::vector<double>& v, StateIndex s) const {
    check(s);
    return {v.data() + s * n_actions_, n_actions_};
  }
  void check(StateIndex s) const {
    if (s >= n_states_) throw std::out_of_range("MixedPolicy: state index out of range");
  }

  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  double delta_win_ = 0.04;
  double delta_lose_ = 0.16;
  std::vector<double> probs_;
  std::vector<double> avg_probs_;
  std::vector<std::uint64_t> visits_;
};

inline void phc_update(MixedPolicy& policy, StateIndex s, std::span<const double> q_row, double xi) {
  phc_update(policy.probs(s), argmax(q_row), xi);
}

// One WoLF-PHC policy step for state s: refresh the average policy with
// weight 1/visits, pick the step size from the win/lose test (ties lose),
// then hill-climb toward the greedy action. The caller records the visit
// before stepping, so visits(s) >= 1 here.
inline WolfBranch wolf_phc_step(MixedPolicy& policy, StateIndex s, std::span<const double> q_row) {
  if (q_row.size() != policy.n_actions())
    throw std::invalid_argument("wolf_phc_step: q_row size != |A|");
  const auto count = policy.visits(s);
  if (count == 0) throw std::logic_error("wolf_phc_step: state has not been visited");
  auto pi = policy.probs(s);
  auto avg = policy.avg_probs(s);
  const double w = 1.0 / static_cast<double>(count);
  double current_value = 0.0;
  double average_value = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    avg[a] += w * (pi[a] - avg[a]);
    current_value += pi[a] * q_row[a];
    average_value += avg[a] * q_row[a];
  }
  const WolfBranch branch = current_value > average_value ? WolfBranch::winning : WolfBranch::losing;
  phc_update(pi, argmax(q_row), branch == WolfBranch::winning ? policy.delta_win() : policy.delta_lose());
  return branch;
}

}  // namespace irsaj
