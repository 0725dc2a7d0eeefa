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

// Learner checkpoints as self-describing JSON text. Doubles are written in
// shortest round-trip form and the engine state in its standard textual
// form, so save followed by load reproduces the agent bit for bit.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "irsaj/agents.hpp"

namespace irsaj {

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_json(const TabularAgent& agent, const nlohmann::json& codec) {
  const AgentParams& p = agent.params();
  std::ostringstream rng;
  rng << agent.rng();
  nlohmann::json j = {
      {"format", "irsaj-checkpoint"},
      {"version", kCheckpointVersion},
      {"approach", std::string(to_string(agent.kind()))},
      {"codec", codec},
      {"hyperparameters",
       {{"alpha", p.alpha},
        {"alpha_current", agent.q().alpha()},
        {"gamma", p.gamma},
        {"epsilon", p.epsilon},
        {"xi", p.delta_win},
        {"delta_lose", p.delta_lose},
        {"alpha_decay", p.alpha_decay},
        {"selection", std::string(to_string(p.selection))}}},
      {"n_states", agent.q().n_states()},
      {"n_actions", agent.q().n_actions()},
      {"q", agent.q().values()},
      {"rng", rng.str()}};
  if (agent.kind() == Approach::wolf_phc) {
    j["policy"] = agent.policy().all_probs();
    j["average_policy"] = agent.policy().all_avg_probs();
    j["visits"] = agent.policy().all_visits();
  }
  return j;
}

inline TabularAgent agent_from_checkpoint(const nlohmann::json& j, nlohmann::json* codec = nullptr) {
  try {
    if (j.at("format") != "irsaj-checkpoint" || j.at("version") != kCheckpointVersion)
      throw IoError("checkpoint: unsupported format or version");
    const auto& h = j.at("hyperparameters");
    AgentParams p;
    p.alpha = h.at("alpha").get<double>();
    p.gamma = h.at("gamma").get<double>();
    p.epsilon = h.at("epsilon").get<double>();
    p.delta_win = h.at("xi").get<double>();
    p.delta_lose = h.at("delta_lose").get<double>();
    p.alpha_decay = h.at("alpha_decay").get<double>();
    p.selection = parse_selection(h.at("selection").get<std::string>());
    const Approach kind = parse_approach(j.at("approach").get<std::string>());
    const auto n_s = j.at("n_states").get<std::size_t>();
    const auto n_a = j.at("n_actions").get<std::size_t>();

    Rng rng;
    std::istringstream rs(j.at("rng").get<std::string>());
    rs >> rng;
    if (!rs) throw IoError("checkpoint: bad engine state");

    TabularAgent agent(kind, n_s, n_a, p, rng);
    agent.q().set_alpha(h.at("alpha_current").get<double>());
    auto q = j.at("q").get<std::vector<double>>();
    if (q.size() != n_s * n_a) throw IoError("checkpoint: Q-table size mismatch");
    agent.q().values() = std::move(q);
    if (kind == Approach::wolf_phc) {
      auto pi = j.at("policy").get<std::vector<double>>();
      auto avg = j.at("average_policy").get<std::vector<double>>();
      auto visits = j.at("visits").get<std::vector<std::uint64_t>>();
      if (pi.size() != n_s * n_a || avg.size() != n_s * n_a || visits.size() != n_s)
        throw IoError("checkpoint: policy table size mismatch");
      agent.policy().all_probs() = std::move(pi);
      agent.policy().all_avg_probs() = std::move(avg);
      agent.policy().all_visits() = std::move(visits);
    }
    if (codec) *codec = j.at("codec");
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const TabularAgent& agent, const nlohmann::json& codec,
                            const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << checkpoint_json(agent, codec).dump() << '\n';
  if (!out) throw IoError("save_checkpoint: write failed for " + file.string());
}

inline TabularAgent load_checkpoint(const std::filesystem::path& file, nlohmann::json* codec = nullptr) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("load_checkpoint: cannot open " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_checkpoint: " + file.string() + ": " + e.what());
  }
  return agent_from_checkpoint(j, codec);
}

}  // namespace irsaj
