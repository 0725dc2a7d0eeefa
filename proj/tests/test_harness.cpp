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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace irsaj;

namespace {

ExperimentConfig tiny_config() {
  return parse_config(R"({
    "geometry": {"n_ues": 2},
    "environment": {"n_irs_elements": 8},
    "codec": {"phase_levels": 2, "n_groups": 2},
    "training": {"n_episodes": 3, "steps_per_episode": 20},
    "seeds": [1, 2],
    "sweep": {"p_max_dbm": [20, 30], "n_irs_elements": [4, 8]}
  })");
}

ExperimentConfig demo_config() {
  const auto path = std::filesystem::path(__FILE__).parent_path().parent_path() / "configs" / "demo.json";
  return load_config(path.string());
}

// Direct reading of the definition: the earliest t >= W-1 from which every
// later window mean stays inside the band.
std::size_t convergence_by_definition(const std::vector<double>& x, std::size_t window, double band, double frac) {
  const std::size_t n = x.size();
  const std::size_t W = std::clamp<std::size_t>(window, 1, n);
  const std::size_t tail = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n)));
  double target = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) target += x[i];
  target /= static_cast<double>(tail);
  auto inside = [&](std::size_t t) {
    double s = 0.0;
    for (std::size_t i = t + 1 - W; i <= t; ++i) s += x[i];
    return std::abs(s / static_cast<double>(W) - target) <= band * std::abs(target);
  };
  for (std::size_t t = W - 1; t < n; ++t) {
    bool ok = true;
    for (std::size_t u = t; u < n && ok; ++u) ok = inside(u);
    if (ok) return t;
  }
  return n;
}

}  // namespace

TEST(Convergence, MatchesDefinitionOnRandomTraces) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 20 + gen() % 200;
    const double rise = 1.0 + static_cast<double>(gen() % 50);
    const double noise = 0.01 * static_cast<double>(gen() % 10);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = 1.0 - std::exp(-static_cast<double>(t) / rise) + noise * nd(gen);
    const std::size_t window = 1 + gen() % 15;
    EXPECT_EQ(convergence_iteration(x, window, 0.02, 0.1), convergence_by_definition(x, window, 0.02, 0.1))
        << "trial " << trial;
  }
}

TEST(Convergence, EdgeCases) {
  const std::vector<double> flat(100, 3.0);
  EXPECT_EQ(convergence_iteration(flat, 10, 0.02, 0.1), 9u);
  std::vector<double> step(100, 0.0);
  for (std::size_t t = 40; t < 100; ++t) step[t] = 1.0;
  EXPECT_EQ(convergence_iteration(step, 1, 0.02, 0.1), 40u);
  EXPECT_EQ(convergence_iteration(step, 5, 0.02, 0.1), 44u);
  EXPECT_EQ(convergence_iteration(std::vector<double>{}, 5, 0.02, 0.1), 0u);
}

TEST(Convergence, TailMeanUsesCeilFraction) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  EXPECT_DOUBLE_EQ(tail_mean(x, 0.1), 10.5);  // ceil(1.1) = 2 values
  EXPECT_DOUBLE_EQ(tail_mean(x, 1.0), 6.0);
}

TEST(RunTraining, TraceLengthsAndDeterminism) {
  const ExperimentConfig cfg = tiny_config();
  for (Approach a : {Approach::wolf_phc, Approach::fast_q, Approach::greedy, Approach::no_irs, Approach::random}) {
    const RunRecord r1 = run_training(cfg, a, 7);
    const RunRecord r2 = run_training(cfg, a, 7);
    EXPECT_TRUE(r1 == r2) << to_string(a);
    EXPECT_EQ(r1.rates.size(), 60u);
    EXPECT_EQ(r1.rewards.size(), 60u);
    EXPECT_EQ(r1.episode_avg_rates.size(), 3u);
    EXPECT_EQ(r1.n_steps, 60u);
    EXPECT_EQ(r1.config_hash, config_hash(cfg));
    const RunRecord other = run_training(cfg, a, 8);
    EXPECT_NE(r1.rates, other.rates) << to_string(a);
  }
}

TEST(RunTraining, NoIrsDoesNotLearn) {
  const ExperimentConfig cfg = tiny_config();
  ExperimentConfig tweaked = cfg;
  tweaked.agent.alpha = 0.9;
  tweaked.agent.delta_win = 0.5;
  tweaked.agent.delta_lose = 0.5;
  tweaked.agent.epsilon = 0.0;
  EXPECT_EQ(run_training(cfg, Approach::no_irs, 3).rates, run_training(tweaked, Approach::no_irs, 3).rates);
}

TEST(RunTraining, CommonRandomNumbersAcrossApproaches) {
  const ExperimentConfig cfg = tiny_config();
  const RunRecord a = run_training(cfg, Approach::wolf_phc, 5);
  const RunRecord b = run_training(cfg, Approach::greedy, 5);
  EXPECT_EQ(a.metadata["ue_positions"], b.metadata["ue_positions"]);
  EXPECT_EQ(a.metadata["codec"], b.metadata["codec"]);
}

TEST(RunTraining, CheckpointWrittenAndLoadable) {
  const auto dir = oracle::scratch_dir("harness_ckpt");
  RunOptions ro;
  ro.checkpoint = dir / "ckpt.json";
  const ExperimentConfig cfg = tiny_config();
  const RunRecord r = run_training(cfg, Approach::wolf_phc, 2, ro);
  nlohmann::json codec;
  const TabularAgent agent = load_checkpoint(dir / "ckpt.json", &codec);
  EXPECT_EQ(codec, r.metadata["codec"]);
  EXPECT_EQ(agent.q().n_actions(), codec["action_space_size"].get<std::size_t>());
}

TEST(RunTraining, WolfNotWorseThanRandomOnDemoConfig) {
  const ExperimentConfig cfg = demo_config();
  double wolf = 0.0, random = 0.0;
  for (std::uint64_t seed : cfg.seeds) {
    wolf += run_training(cfg, Approach::wolf_phc, seed).final_avg_rate;
    random += run_training(cfg, Approach::random, seed).final_avg_rate;
  }
  EXPECT_GE(wolf, random);
}

TEST(Sweep, CartesianProductCount) {
  ExperimentConfig cfg = tiny_config();
  cfg.sweep.p_max_dbm = {15, 20, 25, 30, 35, 40};
  cfg.training.n_episodes = 1;
  cfg.training.steps_per_episode = 2;
  const std::vector<Approach> approaches{Approach::wolf_phc, Approach::fast_q, Approach::greedy, Approach::no_irs};
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), 1);
  const SweepResult res = run_sweep(cfg, SweepAxis::p_max_dbm, approaches, seeds);
  EXPECT_EQ(res.records.size(), 240u);
  EXPECT_TRUE(res.failures.empty());
  EXPECT_EQ(summarize(res.records).size(), approaches.size() * 6);
  EXPECT_EQ(res.records.front().axis_value, 15.0);
  EXPECT_EQ(res.records.back().axis_value, 40.0);
}

TEST(Sweep, IndependentOfParallelism) {
  const ExperimentConfig cfg = tiny_config();
  const std::vector<Approach> approaches{Approach::wolf_phc, Approach::no_irs};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  SweepOptions serial, parallel;
  serial.keep_traces = parallel.keep_traces = true;
  parallel.parallel = 4;
  const SweepResult a = run_sweep(cfg, SweepAxis::n_irs_elements, approaches, seeds, serial);
  const SweepResult b = run_sweep(cfg, SweepAxis::n_irs_elements, approaches, seeds, parallel);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_TRUE(a.records[i] == b.records[i]) << i;
  // Each run equals the standalone run at that axis value.
  const RunRecord solo = run_training(at_axis_value(cfg, SweepAxis::n_irs_elements, 4), Approach::wolf_phc, 2);
  EXPECT_EQ(a.records[1].rates, solo.rates);
}

TEST(Sweep, FailuresRecordedAndSweepContinues) {
  ExperimentConfig cfg = tiny_config();
  cfg.sweep.p_max_dbm = {std::numeric_limits<double>::infinity(), 30.0};
  const auto dir = oracle::scratch_dir("sweep_fail");
  SweepOptions so;
  so.out_dir = dir;
  const std::vector<Approach> approaches{Approach::greedy};
  const std::vector<std::uint64_t> seeds{1};
  const SweepResult res = run_sweep(cfg, SweepAxis::p_max_dbm, approaches, seeds, so);
  ASSERT_EQ(res.failures.size(), 1u);
  EXPECT_TRUE(std::isinf(res.failures[0].axis_value));
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].axis_value, 30.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "failures.csv"));
}

TEST(Summary, SingleRecordHasZeroStd) {
  RunRecord r;
  r.approach = Approach::greedy;
  r.axis_value = 30.0;
  r.final_avg_rate = 1.25;
  r.convergence_iteration = 17;
  const auto rows = summarize(std::vector<RunRecord>{r});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].mean_final_rate, 1.25);
  EXPECT_EQ(rows[0].std_final_rate, 0.0);
  EXPECT_EQ(rows[0].mean_convergence_iteration, 17.0);
  EXPECT_EQ(rows[0].n_runs, 1u);
}

TEST(Summary, SampleStatistics) {
  std::vector<RunRecord> recs;
  for (double v : {1.0, 2.0, 4.0}) {
    RunRecord r;
    r.final_avg_rate = v;
    r.seed = static_cast<std::uint64_t>(v);
    recs.push_back(r);
  }
  const auto rows = summarize(recs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].mean_final_rate, 7.0 / 3.0);
  EXPECT_NEAR(rows[0].std_final_rate, std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                                 (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2.0),
              1e-12);
}

TEST(Persistence, RecomputedSummaryIsBitExact) {
  const ExperimentConfig cfg = tiny_config();
  const auto dir = oracle::scratch_dir("persist");
  SweepOptions so;
  so.out_dir = dir;
  const std::vector<Approach> approaches{Approach::wolf_phc, Approach::fast_q, Approach::no_irs};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const SweepResult res = run_sweep(cfg, SweepAxis::p_max_dbm, approaches, seeds, so);
  const auto original = summary_csv(summarize(res.records));
  const auto loaded = load_runs(dir);
  ASSERT_EQ(loaded.size(), res.records.size());
  EXPECT_EQ(summary_csv(summarize(loaded)), original);
  for (const RunRecord& r : loaded) EXPECT_EQ(r.rates.size(), r.n_steps);
}

TEST(Persistence, RunFilesLayout) {
  const ExperimentConfig cfg = tiny_config();
  const auto dir = oracle::scratch_dir("layout");
  RunOptions ro;
  ro.overrides = {"agent.epsilon=0"};
  RunRecord r = run_training(parse_config(to_json(cfg).dump(), ro.overrides), Approach::fast_q, 4, ro);
  write_run(r, dir);
  const auto stem = dir / run_stem(r);
  const std::string csv = oracle::read_file(std::filesystem::path(stem).concat(".csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,episode,reward,rate,sum_power_w,jam_power_w");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 61);
  const auto meta = nlohmann::json::parse(oracle::read_file(std::filesystem::path(stem).concat(".json")));
  EXPECT_EQ(meta["seed"], 4);
  EXPECT_EQ(meta["approach"], "fast-q");
  EXPECT_EQ(meta["overrides"][0], "agent.epsilon=0");
  EXPECT_EQ(meta["config"]["agent"]["epsilon"], 0.0);
  EXPECT_TRUE(meta.contains("convergence_iteration"));
  EXPECT_TRUE(meta["codec"].contains("state_space_size"));
  EXPECT_TRUE(meta["codec"].contains("action_space_size"));
  const RunRecord back = load_run(std::filesystem::path(stem).concat(".json"));
  EXPECT_EQ(back.rates, r.rates);
  EXPECT_EQ(back.rewards, r.rewards);
  EXPECT_EQ(back.convergence_iteration, r.convergence_iteration);
  EXPECT_EQ(back.final_avg_rate, r.final_avg_rate);
}

TEST(Persistence, BadFilesAreIoErrors) {
  const auto dir = oracle::scratch_dir("bad_runs");
  EXPECT_THROW(load_run(dir / "run_missing.json"), IoError);
  {
    std::ofstream(dir / "run_x.json") << "{\"truncated\":";
  }
  EXPECT_THROW(load_run(dir / "run_x.json"), IoError);
}
