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

// irsaj: command-line front end for training, sweeps and summaries.
//
// Exit codes: 0 success, 2 usage, 3 configuration, 4 run failure, 5 I/O.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irsaj/demo_config.hpp"
#include "irsaj/irsaj.hpp"

namespace {

namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kUsage = 2, kConfig = 3, kRun = 4, kIo = 5 };

struct Options {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> approaches;
  std::vector<std::string> overrides;
  std::size_t parallel = 1;
  std::string axis = "p_max";
};

irsaj::ExperimentConfig load(const Options& o, bool allow_bundled) {
  if (o.config.empty()) {
    if (!allow_bundled) throw irsaj::ConfigError("--config", "a config file is required");
    return irsaj::parse_config(irsaj::kDemoConfigJson, o.overrides);
  }
  return irsaj::load_config(o.config, o.overrides);
}

std::vector<irsaj::Approach> approaches_of(const Options& o, const irsaj::ExperimentConfig& cfg) {
  if (o.approaches.empty()) return cfg.approaches;
  std::vector<irsaj::Approach> out;
  for (const auto& a : o.approaches) out.push_back(irsaj::parse_approach(a));
  return out;
}

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw irsaj::ConfigError("--out", "an output directory is required");
  return o.out;
}

int report_failures(const irsaj::SweepResult& res) {
  for (const auto& f : res.failures)
    std::cerr << "run failed: " << irsaj::to_string(f.approach) << " @ " << f.axis_value << " seed " << f.seed
              << ": " << f.error << '\n';
  return res.failures.empty() ? kOk : kRun;
}

int cmd_validate(const Options& o) {
  const auto cfg = load(o, true);
  std::cout << "config ok (hash " << irsaj::hex64(irsaj::config_hash(cfg)) << ")\n";
  return kOk;
}

// One run per (approach, seed); defaults to the first configured seed.
int cmd_train(const Options& o) {
  const auto cfg = load(o, false);
  const fs::path dir = out_dir(o);
  const auto seeds = o.seeds.empty() ? std::vector<std::uint64_t>{cfg.seeds.front()} : o.seeds;
  int status = kOk;
  for (const auto a : approaches_of(o, cfg)) {
    for (const auto seed : seeds) {
      irsaj::RunOptions ro;
      ro.overrides = o.overrides;
      if (a == irsaj::Approach::wolf_phc || a == irsaj::Approach::fast_q)
        ro.checkpoint = dir / ("checkpoint_" + std::string(irsaj::to_string(a)) + "_seed" + std::to_string(seed) + ".json");
      irsaj::RunRecord rec;
      try {
        rec = irsaj::run_training(cfg, a, seed, ro);
      } catch (const irsaj::ConfigError&) {
        throw;
      } catch (const irsaj::IoError&) {
        throw;
      } catch (const std::exception& e) {
        std::cerr << "run failed: " << irsaj::to_string(a) << " seed " << seed << ": " << e.what() << '\n';
        status = kRun;
        continue;
      }
      irsaj::write_run(rec, dir);
      std::cout << irsaj::to_string(a) << " seed " << seed << ": final rate " << rec.final_avg_rate
                << ", convergence step " << rec.convergence_iteration << '\n';
    }
  }
  return status;
}

int sweep_into(const irsaj::ExperimentConfig& cfg, const Options& o, irsaj::SweepAxis axis,
               const std::vector<std::uint64_t>& seeds) {
  const fs::path dir = out_dir(o);
  irsaj::SweepOptions so;
  so.out_dir = dir;
  so.parallel = o.parallel;
  so.overrides = o.overrides;
  const auto approaches = approaches_of(o, cfg);
  const auto res = irsaj::run_sweep(cfg, axis, approaches, seeds, so);
  if (!res.records.empty()) {
    const auto rows = irsaj::summarize(res.records);
    irsaj::write_summary(rows, dir / "summary.csv");
    std::cout << irsaj::summary_csv(rows);
  }
  return report_failures(res);
}

int cmd_sweep(const Options& o) {
  const auto cfg = load(o, false);
  const auto seeds = o.seeds.empty() ? cfg.seeds : o.seeds;
  return sweep_into(cfg, o, irsaj::parse_sweep_axis(o.axis), seeds);
}

int cmd_summarize(const Options& o) {
  const fs::path dir = out_dir(o);
  if (!fs::is_directory(dir)) throw irsaj::IoError("summarize: no such directory " + dir.string());
  const auto records = irsaj::load_runs(dir);
  if (records.empty()) throw irsaj::IoError("summarize: no run records in " + dir.string());
  const auto rows = irsaj::summarize(records);
  irsaj::write_summary(rows, dir / "summary.csv");
  std::cout << irsaj::summary_csv(rows);
  return kOk;
}

// Bundled four-approach comparison at the configured transmit budget.
int cmd_demo(const Options& o) {
  auto cfg = load(o, true);
  cfg.sweep.p_max_dbm = {cfg.environment.p_max_dbm};
  const auto seeds = o.seeds.empty() ? std::vector<std::uint64_t>{cfg.seeds.front()} : o.seeds;
  return sweep_into(cfg, o, irsaj::SweepAxis::p_max_dbm, seeds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anti-jamming power allocation and IRS phase control with tabular learners"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool with_run_flags) {
    sub->add_option("--config", o.config, "Experiment config (JSON)");
    sub->add_option("--set", o.overrides, "Override a config field, e.g. agent.epsilon=0")->take_all();
    if (!with_run_flags) return;
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seeds, "Seed (repeatable)")->take_all();
    sub->add_option("--approach", o.approaches, "wolf-phc, fast-q, greedy, no-irs or random (repeatable)")
        ->take_all();
    sub->add_option("--parallel", o.parallel, "Concurrent runs")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Check a config file and exit");
  add_common(validate, false);
  auto* train = app.add_subcommand("train", "Train each selected approach once per seed");
  add_common(train, true);
  auto* sweep = app.add_subcommand("sweep", "Sweep the transmit budget or IRS size");
  add_common(sweep, true);
  sweep->add_option("--axis", o.axis, "p_max or m_elements")->check(CLI::IsMember({"p_max", "m_elements"}));
  auto* summarize = app.add_subcommand("summarize", "Rebuild summary.csv from the runs in --out");
  summarize->add_option("--out", o.out, "Directory holding run records")->required();
  auto* demo = app.add_subcommand("demo", "Four-approach comparison on the bundled config");
  add_common(demo, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*train) return cmd_train(o);
    if (*sweep) return cmd_sweep(o);
    if (*summarize) return cmd_summarize(o);
    if (*demo) return cmd_demo(o);
  } catch (const irsaj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const irsaj::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kRun;
  }
  return kUsage;
}
