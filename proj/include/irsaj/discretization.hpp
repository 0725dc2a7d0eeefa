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

// Tabular interface to the cell: observation -> state index, and
// action index <-> (power allocation, grouped IRS phases).

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "irsaj/channel.hpp"
#include "irsaj/common.hpp"
#include "irsaj/environment.hpp"

namespace irsaj {

// Strictly increasing edges e_0 < ... < e_n defining n bins. Intervals are
// right-open except the last; values outside [e_0, e_n] fall into the
// nearest end bin.
class BinEdges {
 public:
  BinEdges() = default;
  explicit BinEdges(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw std::invalid_argument("BinEdges: need at least two edges");
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
      if (!(edges_[i] < edges_[i + 1])) throw std::invalid_argument("BinEdges: edges must be strictly increasing");
  }

  static BinEdges uniform(double lo, double hi, std::size_t n_bins) {
    if (n_bins == 0 || !(hi > lo)) throw std::invalid_argument("BinEdges::uniform: bad range");
    std::vector<double> e(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
    return BinEdges(std::move(e));
  }

  // Equal-count bins over the samples (empirical quantiles).
  static BinEdges quantiles(std::vector<double> samples, std::size_t n_bins) {
    if (n_bins == 0 || samples.size() < n_bins + 1) throw std::invalid_argument("BinEdges::quantiles: too few samples");
    std::sort(samples.begin(), samples.end());
    std::vector<double> e(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) {
      const double pos = static_cast<double>(i) * static_cast<double>(samples.size() - 1) / static_cast<double>(n_bins);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, samples.size() - 1);
      e[i] = samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
    }
    return BinEdges(std::move(e));
  }

  std::size_t n_bins() const { return edges_.empty() ? 0 : edges_.size() - 1; }
  const std::vector<double>& edges() const { return edges_; }

  std::size_t bin(double v) const {
    if (std::isnan(v)) throw std::domain_error("BinEdges: NaN value");
    const auto first = edges_.begin() + 1;
    const auto last = edges_.end() - 1;
    return static_cast<std::size_t>(std::upper_bound(first, last, v) - first);
  }

  friend bool operator==(const BinEdges&, const BinEdges&) = default;

 private:
  std::vector<double> edges_;
};

inline double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Per-UE observation components are averaged over UEs, converted to
// dBm / dB, and binned. index = jam + n_jam * (sinr + n_sinr * channel).
class StateCodec {
 public:
  StateCodec() = default;
  StateCodec(BinEdges jam_power_dbm, BinEdges sinr_db, BinEdges channel_db)
      : jam_(std::move(jam_power_dbm)), sinr_(std::move(sinr_db)), chan_(std::move(channel_db)) {}

  const BinEdges& jam_power_bins() const { return jam_; }
  const BinEdges& sinr_bins() const { return sinr_; }
  const BinEdges& channel_bins() const { return chan_; }
  std::size_t size() const { return jam_.n_bins() * sinr_.n_bins() * chan_.n_bins(); }

  StateIndex compose(std::size_t jam_bin, std::size_t sinr_bin, std::size_t chan_bin) const {
    if (jam_bin >= jam_.n_bins() || sinr_bin >= sinr_.n_bins() || chan_bin >= chan_.n_bins())
      throw std::out_of_range("StateCodec::compose: bin out of range");
    return jam_bin + jam_.n_bins() * (sinr_bin + sinr_.n_bins() * chan_bin);
  }

  StateIndex quantize(const RawObservation& obs) const {
    auto finite = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(obs.prev_jam_powers) || !finite(obs.prev_sinrs) || !finite(obs.channel_magnitudes))
      throw std::domain_error("StateCodec::quantize: non-finite observation");
    return compose(jam_.bin(watts_to_dbm(mean_of(obs.prev_jam_powers))),
                   sinr_.bin(linear_to_db(mean_of(obs.prev_sinrs))),
                   chan_.bin(magnitude_db(mean_of(obs.channel_magnitudes))));
  }

  static double magnitude_db(double magnitude) { return 2.0 * linear_to_db(magnitude); }

  friend bool operator==(const StateCodec&, const StateCodec&) = default;

 private:
  BinEdges jam_;
  BinEdges sinr_;
  BinEdges chan_;
};

inline StateIndex quantize_state(const RawObservation& obs, const StateCodec& codec) { return codec.quantize(obs); }

struct DecodedAction {
  PowerAllocation power;
  PhaseShiftMatrix phases;
};

// Digits of an action: one power combination (index into the feasible
// list) and one phase level per IRS group.
struct ActionParts {
  std::size_t power_combo = 0;
  std::vector<std::size_t> phase_levels;

  friend bool operator==(const ActionParts&, const ActionParts&) = default;
};

// index = power_combo + n_power_combos * sum_g phase_level[g] * L^g.
class ActionCodec {
 public:
  ActionCodec() = default;
  ActionCodec(std::vector<double> power_fractions, std::size_t n_ues, double p_max_w, std::size_t phase_levels,
              std::size_t n_groups, std::size_t n_elements)
      : fractions_(std::move(power_fractions)), n_ues_(n_ues), p_max_(p_max_w), levels_(phase_levels),
        n_groups_(n_groups), n_elements_(n_elements) {
    if (fractions_.empty()) throw ConfigError("codec.power_fractions", "must not be empty");
    for (double f : fractions_)
      if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("codec.power_fractions", "fractions must lie in [0, 1]");
    if (!std::is_sorted(fractions_.begin(), fractions_.end()))
      throw ConfigError("codec.power_fractions", "must be sorted ascending");
    if (n_ues == 0) throw ConfigError("geometry.n_ues", "must be >= 1");
    if (!(p_max_w > 0.0)) throw ConfigError("environment.p_max_dbm", "budget must be positive");
    if (phase_levels == 0) throw ConfigError("codec.phase_levels", "must be >= 1");
    if (n_groups == 0 || n_groups > n_elements)
      throw ConfigError("codec.n_groups", "must be in [1, n_irs_elements]");

    enumerate_power_combos();
    if (combos_.empty()) throw ConfigError("codec.power_fractions", "no feasible power combination");
    n_phase_configs_ = 1;
    for (std::size_t g = 0; g < n_groups_; ++g) {
      if (n_phase_configs_ > (std::size_t{1} << 40) / levels_) throw ConfigError("codec", "action space too large");
      n_phase_configs_ *= levels_;
    }
    group_of_.resize(n_elements_);
    for (std::size_t g = 0; g < n_groups_; ++g)
      for (std::size_t m = group_start(g); m < group_start(g + 1); ++m) group_of_[m] = g;
  }

  std::size_t size() const { return combos_.size() * n_phase_configs_; }
  std::size_t n_power_combos() const { return combos_.size(); }
  std::size_t n_phase_configs() const { return n_phase_configs_; }
  std::size_t n_ues() const { return n_ues_; }
  std::size_t n_groups() const { return n_groups_; }
  std::size_t n_elements() const { return n_elements_; }
  std::size_t phase_levels() const { return levels_; }
  double p_max() const { return p_max_; }
  const std::vector<double>& power_fractions() const { return fractions_; }
  // Per-UE level indices of each feasible combination.
  const std::vector<std::vector<std::size_t>>& power_combos() const { return combos_; }

  std::size_t group_start(std::size_t g) const { return g * n_elements_ / n_groups_; }
  std::size_t group_of(std::size_t m) const { return group_of_.at(m); }
  double phase_angle(std::size_t level) const { return kTwoPi * static_cast<double>(level) / static_cast<double>(levels_); }

  ActionParts decode_parts(ActionIndex index) const {
    if (index >= size()) throw std::out_of_range("ActionCodec: action index out of range");
    ActionParts parts;
    parts.power_combo = index % combos_.size();
    std::size_t rest = index / combos_.size();
    parts.phase_levels.resize(n_groups_);
    for (std::size_t g = 0; g < n_groups_; ++g) {
      parts.phase_levels[g] = rest % levels_;
      rest /= levels_;
    }
    return parts;
  }

  ActionIndex encode(const ActionParts& parts) const {
    if (parts.power_combo >= combos_.size() || parts.phase_levels.size() != n_groups_)
      throw std::out_of_range("ActionCodec::encode: malformed action parts");
    std::size_t phase_index = 0;
    for (std::size_t g = n_groups_; g-- > 0;) {
      if (parts.phase_levels[g] >= levels_) throw std::out_of_range("ActionCodec::encode: phase level out of range");
      phase_index = phase_index * levels_ + parts.phase_levels[g];
    }
    return parts.power_combo + combos_.size() * phase_index;
  }

  ActionIndex compose(std::size_t power_combo, std::size_t phase_config) const {
    if (power_combo >= combos_.size() || phase_config >= n_phase_configs_)
      throw std::out_of_range("ActionCodec::compose: out of range");
    return power_combo + combos_.size() * phase_config;
  }
  std::size_t power_combo_of(ActionIndex index) const { return index % combos_.size(); }
  std::size_t phase_config_of(ActionIndex index) const { return index / combos_.size(); }

  PowerAllocation power_allocation(std::size_t combo) const {
    PowerAllocation pa;
    pa.p_max = p_max_;
    pa.powers.resize(n_ues_);
    const auto& levels = combos_.at(combo);
    for (std::size_t k = 0; k < n_ues_; ++k) pa.powers[k] = fractions_[levels[k]] * p_max_;
    return pa;
  }

  PhaseShiftMatrix phase_profile(std::size_t phase_config) const {
    if (phase_config >= n_phase_configs_) throw std::out_of_range("ActionCodec: phase config out of range");
    std::vector<double> group_theta(n_groups_);
    for (std::size_t g = 0; g < n_groups_; ++g) {
      group_theta[g] = phase_angle(phase_config % levels_);
      phase_config /= levels_;
    }
    std::vector<double> thetas(n_elements_);
    for (std::size_t m = 0; m < n_elements_; ++m) thetas[m] = group_theta[group_of_[m]];
    return PhaseShiftMatrix(std::move(thetas));
  }

  DecodedAction decode(ActionIndex index) const {
    if (index >= size()) throw std::out_of_range("ActionCodec: action index out of range");
    return {power_allocation(power_combo_of(index)), phase_profile(phase_config_of(index))};
  }

 private:
  void enumerate_power_combos() {
    const std::size_t n_levels = fractions_.size();
    std::vector<std::size_t> digits(n_ues_, 0);
    while (true) {
      double sum = 0.0;
      for (std::size_t k = 0; k < n_ues_; ++k) sum += fractions_[digits[k]];
      if (sum <= 1.0 + 1e-12) combos_.push_back(digits);
      std::size_t k = 0;
      while (k < n_ues_ && ++digits[k] == n_levels) digits[k++] = 0;
      if (k == n_ues_) break;
    }
  }

  std::vector<double> fractions_;
  std::size_t n_ues_ = 0;
  double p_max_ = 0.0;
  std::size_t levels_ = 0;
  std::size_t n_groups_ = 0;
  std::size_t n_elements_ = 0;
  std::size_t n_phase_configs_ = 0;
  std::vector<std::vector<std::size_t>> combos_;
  std::vector<std::size_t> group_of_;
};

inline DecodedAction decode_action(ActionIndex index, const ActionCodec& codec) { return codec.decode(index); }

}  // namespace irsaj
