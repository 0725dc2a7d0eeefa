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

// Experiment configuration: a JSON document with one section per
// subsystem. Every key must already exist in the defaults, so typos fail
// with the offending path instead of being silently ignored.

#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "irsaj/agents.hpp"
#include "irsaj/channel.hpp"
#include "irsaj/environment.hpp"
#include "irsaj/jammer.hpp"

namespace irsaj {

using nlohmann::json;

struct CodecConfig {
  std::vector<double> power_fractions{0.0, 0.25, 0.5, 1.0};
  std::size_t phase_levels = 4;
  std::size_t n_groups = 4;
  double jam_lo_dbm = 15.0;
  double jam_hi_dbm = 40.0;
  std::size_t jam_bins = 4;
  double sinr_lo_db = -10.0;
  double sinr_hi_db = 30.0;
  std::size_t sinr_bins = 4;
  std::size_t channel_bins = 3;
  std::size_t warmup_draws = 64;
};

struct TrainingConfig {
  std::size_t n_episodes = 500;
  std::size_t steps_per_episode = 200;
  // Moving-average window of the convergence metric; 0 means one episode.
  std::size_t convergence_window = 0;
  double convergence_band = 0.02;
  double final_fraction = 0.1;

  std::size_t window() const { return convergence_window == 0 ? steps_per_episode : convergence_window; }
};

struct SweepConfig {
  std::vector<double> p_max_dbm{15.0, 20.0, 25.0, 30.0, 35.0, 40.0};
  std::vector<std::size_t> n_irs_elements{20, 60, 100};
};

struct ExperimentConfig {
  Geometry geometry;
  std::size_t n_ues = 4;
  PathlossConfig pathloss;
  EnvironmentConfig environment;
  JammerConfig jammer;
  CodecConfig codec;
  AgentParams agent;
  TrainingConfig training;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<Approach> approaches{Approach::wolf_phc, Approach::fast_q, Approach::greedy, Approach::no_irs};
  SweepConfig sweep;

  void validate() const;
};

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

inline json point_json(Point p) { return json::array({p.x, p.y}); }

inline Point point_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(path, "expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
T get_as(const json& j, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!j.is_number()) throw ConfigError(path, "expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer() || (std::is_unsigned_v<T> && j.get<std::int64_t>() < 0))
        throw ConfigError(path, "expected a non-negative integer");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError(path, "expected a string");
    }
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  }
}

template <class T>
std::vector<T> list_as(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_as<T>(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Rejects keys in `user` that do not exist in `defaults`, recursing into
// objects, and overlays user values onto the defaults.
inline void merge_strict(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string p = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(p, "unknown key");
    json& slot = base[it.key()];
    if (slot.is_object())
      merge_strict(slot, it.value(), p);
    else
      slot = it.value();
  }
}

}  // namespace detail

inline json to_json(const ExperimentConfig& c) {
  json j;
  const auto& g = c.geometry;
  j["geometry"] = {{"bs", detail::point_json(g.bs)},
                   {"irs", detail::point_json(g.irs)},
                   {"jammer", detail::point_json(g.jammer)},
                   {"ue_region", {g.ue_region.x_min, g.ue_region.x_max, g.ue_region.y_min, g.ue_region.y_max}},
                   {"n_ues", c.n_ues}};
  const auto& pl = c.pathloss;
  j["pathloss"] = {{"pl0_db", pl.pl0_db}, {"d0", pl.d0},          {"beta_bu", pl.beta_bu},
                   {"beta_br", pl.beta_br}, {"beta_ru", pl.beta_ru}, {"beta_ju", pl.beta_ju}};
  const auto& e = c.environment;
  j["environment"] = {{"n_bs_antennas", e.dims.n_bs_antennas},
                      {"n_irs_elements", e.dims.n_irs_elements},
                      {"n_jammer_antennas", e.dims.n_jammer_antennas},
                      {"p_max_dbm", e.p_max_dbm},
                      {"noise_dbm", e.noise_dbm},
                      {"lambda1", e.lambda1},
                      {"reward_power_unit", std::string(to_string(e.reward_power_unit))},
                      {"jam_estimate_noise", e.jam_estimate_noise}};
  const auto& jm = c.jammer;
  j["jammer"] = {{"kind", std::string(to_string(jm.kind))},
                 {"power_dbm", jm.power_dbm},
                 {"power_grid_dbm", jm.power_grid_dbm},
                 {"min_power_dbm", jm.min_power_dbm},
                 {"max_power_dbm", jm.max_power_dbm},
                 {"vector_mode", std::string(to_string(jm.vector_mode))},
                 {"alpha", jm.alpha},
                 {"gamma", jm.gamma},
                 {"epsilon", jm.epsilon}};
  const auto& cd = c.codec;
  j["codec"] = {{"power_fractions", cd.power_fractions},
                {"phase_levels", cd.phase_levels},
                {"n_groups", cd.n_groups},
                {"jam_lo_dbm", cd.jam_lo_dbm},
                {"jam_hi_dbm", cd.jam_hi_dbm},
                {"jam_bins", cd.jam_bins},
                {"sinr_lo_db", cd.sinr_lo_db},
                {"sinr_hi_db", cd.sinr_hi_db},
                {"sinr_bins", cd.sinr_bins},
                {"channel_bins", cd.channel_bins},
                {"warmup_draws", cd.warmup_draws}};
  const auto& a = c.agent;
  j["agent"] = {{"alpha", a.alpha},           {"gamma", a.gamma},
                {"epsilon", a.epsilon},       {"xi", a.delta_win},
                {"delta_lose", a.delta_lose}, {"alpha_decay", a.alpha_decay},
                {"selection", std::string(to_string(a.selection))}};
  const auto& t = c.training;
  j["training"] = {{"n_episodes", t.n_episodes},
                   {"steps_per_episode", t.steps_per_episode},
                   {"convergence_window", t.convergence_window},
                   {"convergence_band", t.convergence_band},
                   {"final_fraction", t.final_fraction}};
  j["seeds"] = c.seeds;
  json approaches = json::array();
  for (Approach ap : c.approaches) approaches.push_back(std::string(to_string(ap)));
  j["approaches"] = approaches;
  j["sweep"] = {{"p_max_dbm", c.sweep.p_max_dbm}, {"n_irs_elements", c.sweep.n_irs_elements}};
  return j;
}

// Builds a config from a complete document (defaults already merged).
inline ExperimentConfig from_json(const json& j) {
  using detail::get_as;
  using detail::list_as;
  ExperimentConfig c;
  const json& g = j.at("geometry");
  c.geometry.bs = detail::point_from(g.at("bs"), "geometry.bs");
  c.geometry.irs = detail::point_from(g.at("irs"), "geometry.irs");
  c.geometry.jammer = detail::point_from(g.at("jammer"), "geometry.jammer");
  const auto region = list_as<double>(g.at("ue_region"), "geometry.ue_region");
  if (region.size() != 4) throw ConfigError("geometry.ue_region", "expected [x_min, x_max, y_min, y_max]");
  c.geometry.ue_region = {region[0], region[1], region[2], region[3]};
  c.n_ues = get_as<std::size_t>(g.at("n_ues"), "geometry.n_ues");

  const json& pl = j.at("pathloss");
  c.pathloss.pl0_db = get_as<double>(pl.at("pl0_db"), "pathloss.pl0_db");
  c.pathloss.d0 = get_as<double>(pl.at("d0"), "pathloss.d0");
  c.pathloss.beta_bu = get_as<double>(pl.at("beta_bu"), "pathloss.beta_bu");
  c.pathloss.beta_br = get_as<double>(pl.at("beta_br"), "pathloss.beta_br");
  c.pathloss.beta_ru = get_as<double>(pl.at("beta_ru"), "pathloss.beta_ru");
  c.pathloss.beta_ju = get_as<double>(pl.at("beta_ju"), "pathloss.beta_ju");

  const json& e = j.at("environment");
  c.environment.dims.n_bs_antennas = get_as<std::size_t>(e.at("n_bs_antennas"), "environment.n_bs_antennas");
  c.environment.dims.n_irs_elements = get_as<std::size_t>(e.at("n_irs_elements"), "environment.n_irs_elements");
  c.environment.dims.n_jammer_antennas =
      get_as<std::size_t>(e.at("n_jammer_antennas"), "environment.n_jammer_antennas");
  c.environment.p_max_dbm = get_as<double>(e.at("p_max_dbm"), "environment.p_max_dbm");
  c.environment.noise_dbm = get_as<double>(e.at("noise_dbm"), "environment.noise_dbm");
  c.environment.lambda1 = get_as<double>(e.at("lambda1"), "environment.lambda1");
  c.environment.reward_power_unit =
      parse_power_unit(get_as<std::string>(e.at("reward_power_unit"), "environment.reward_power_unit"));
  c.environment.jam_estimate_noise = get_as<double>(e.at("jam_estimate_noise"), "environment.jam_estimate_noise");

  const json& jm = j.at("jammer");
  c.jammer.kind = parse_jammer_kind(get_as<std::string>(jm.at("kind"), "jammer.kind"));
  c.jammer.power_dbm = get_as<double>(jm.at("power_dbm"), "jammer.power_dbm");
  c.jammer.power_grid_dbm = list_as<double>(jm.at("power_grid_dbm"), "jammer.power_grid_dbm");
  c.jammer.min_power_dbm = get_as<double>(jm.at("min_power_dbm"), "jammer.min_power_dbm");
  c.jammer.max_power_dbm = get_as<double>(jm.at("max_power_dbm"), "jammer.max_power_dbm");
  c.jammer.vector_mode = parse_jam_vector_mode(get_as<std::string>(jm.at("vector_mode"), "jammer.vector_mode"));
  c.jammer.alpha = get_as<double>(jm.at("alpha"), "jammer.alpha");
  c.jammer.gamma = get_as<double>(jm.at("gamma"), "jammer.gamma");
  c.jammer.epsilon = get_as<double>(jm.at("epsilon"), "jammer.epsilon");

  const json& cd = j.at("codec");
  c.codec.power_fractions = list_as<double>(cd.at("power_fractions"), "codec.power_fractions");
  c.codec.phase_levels = get_as<std::size_t>(cd.at("phase_levels"), "codec.phase_levels");
  c.codec.n_groups = get_as<std::size_t>(cd.at("n_groups"), "codec.n_groups");
  c.codec.jam_lo_dbm = get_as<double>(cd.at("jam_lo_dbm"), "codec.jam_lo_dbm");
  c.codec.jam_hi_dbm = get_as<double>(cd.at("jam_hi_dbm"), "codec.jam_hi_dbm");
  c.codec.jam_bins = get_as<std::size_t>(cd.at("jam_bins"), "codec.jam_bins");
  c.codec.sinr_lo_db = get_as<double>(cd.at("sinr_lo_db"), "codec.sinr_lo_db");
  c.codec.sinr_hi_db = get_as<double>(cd.at("sinr_hi_db"), "codec.sinr_hi_db");
  c.codec.sinr_bins = get_as<std::size_t>(cd.at("sinr_bins"), "codec.sinr_bins");
  c.codec.channel_bins = get_as<std::size_t>(cd.at("channel_bins"), "codec.channel_bins");
  c.codec.warmup_draws = get_as<std::size_t>(cd.at("warmup_draws"), "codec.warmup_draws");

  const json& a = j.at("agent");
  c.agent.alpha = get_as<double>(a.at("alpha"), "agent.alpha");
  c.agent.gamma = get_as<double>(a.at("gamma"), "agent.gamma");
  c.agent.epsilon = get_as<double>(a.at("epsilon"), "agent.epsilon");
  c.agent.delta_win = get_as<double>(a.at("xi"), "agent.xi");
  c.agent.delta_lose = get_as<double>(a.at("delta_lose"), "agent.delta_lose");
  c.agent.alpha_decay = get_as<double>(a.at("alpha_decay"), "agent.alpha_decay");
  c.agent.selection = parse_selection(get_as<std::string>(a.at("selection"), "agent.selection"));

  const json& t = j.at("training");
  c.training.n_episodes = get_as<std::size_t>(t.at("n_episodes"), "training.n_episodes");
  c.training.steps_per_episode = get_as<std::size_t>(t.at("steps_per_episode"), "training.steps_per_episode");
  c.training.convergence_window = get_as<std::size_t>(t.at("convergence_window"), "training.convergence_window");
  c.training.convergence_band = get_as<double>(t.at("convergence_band"), "training.convergence_band");
  c.training.final_fraction = get_as<double>(t.at("final_fraction"), "training.final_fraction");

  c.seeds = list_as<std::uint64_t>(j.at("seeds"), "seeds");
  c.approaches.clear();
  for (const auto& name : list_as<std::string>(j.at("approaches"), "approaches"))
    c.approaches.push_back(parse_approach(name));
  c.sweep.p_max_dbm = list_as<double>(j.at("sweep").at("p_max_dbm"), "sweep.p_max_dbm");
  c.sweep.n_irs_elements = list_as<std::size_t>(j.at("sweep").at("n_irs_elements"), "sweep.n_irs_elements");
  return c;
}

inline void ExperimentConfig::validate() const {
  if (n_ues == 0) throw ConfigError("geometry.n_ues", "must be >= 1");
  if (!(geometry.ue_region.x_max > geometry.ue_region.x_min) || !(geometry.ue_region.y_max > geometry.ue_region.y_min))
    throw ConfigError("geometry.ue_region", "region must have positive extent");
  pathloss.validate();
  environment.validate();
  jammer.validate();
  agent.validate();
  if (codec.n_groups == 0 || codec.n_groups > environment.dims.n_irs_elements)
    throw ConfigError("codec.n_groups", "must be in [1, environment.n_irs_elements]");
  if (codec.phase_levels == 0) throw ConfigError("codec.phase_levels", "must be >= 1");
  if (codec.jam_bins == 0 || !(codec.jam_hi_dbm > codec.jam_lo_dbm)) throw ConfigError("codec.jam_bins", "bad jam-power bins");
  if (codec.sinr_bins == 0 || !(codec.sinr_hi_db > codec.sinr_lo_db)) throw ConfigError("codec.sinr_bins", "bad SINR bins");
  if (codec.channel_bins == 0) throw ConfigError("codec.channel_bins", "must be >= 1");
  if (codec.warmup_draws < codec.channel_bins + 1) throw ConfigError("codec.warmup_draws", "need more draws than bins");
  // Constructing the action codec checks the power grid and grouping.
  ActionCodec(codec.power_fractions, n_ues, environment.p_max_w(), codec.phase_levels, codec.n_groups,
              environment.dims.n_irs_elements);
  if (training.n_episodes == 0) throw ConfigError("training.n_episodes", "must be >= 1");
  if (training.steps_per_episode == 0) throw ConfigError("training.steps_per_episode", "must be >= 1");
  if (!(training.convergence_band > 0.0)) throw ConfigError("training.convergence_band", "must be > 0");
  if (!(training.final_fraction > 0.0 && training.final_fraction <= 1.0))
    throw ConfigError("training.final_fraction", "must be in (0, 1]");
  if (seeds.empty()) throw ConfigError("seeds", "must not be empty");
  if (approaches.empty()) throw ConfigError("approaches", "must not be empty");
  for (std::size_t m : sweep.n_irs_elements)
    if (m < codec.n_groups) throw ConfigError("sweep.n_irs_elements", "fewer elements than IRS groups");
}

// Parses `text` over the defaults, applies dotted-path overrides
// ("agent.epsilon=0"), and validates.
inline ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
  json user;
  try {
    user = text.empty() ? json::object() : json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  json doc = to_json(ExperimentConfig{});
  detail::merge_strict(doc, user, "");
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(ov, "override must look like key=value");
    const std::string path = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    json* slot = &doc;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!slot->is_object() || !slot->contains(part)) throw ConfigError(path, "unknown key");
      slot = &(*slot)[part];
    }
    if (slot->is_object()) throw ConfigError(path, "cannot override a whole section");
    *slot = value;
  }
  ExperimentConfig cfg = from_json(doc);
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

// FNV-1a over the canonical serialization; stable across runs and platforms.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string canon = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace irsaj
