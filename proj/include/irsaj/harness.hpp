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

// Experiment harness: the episode/step training loop for each approach,
// run records and their on-disk form, parameter sweeps and summaries.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "irsaj/agents.hpp"
#include "irsaj/checkpoint.hpp"
#include "irsaj/config.hpp"
#include "irsaj/discretization.hpp"
#include "irsaj/environment.hpp"

namespace irsaj {

namespace fs = std::filesystem;

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Metrics

inline double tail_mean(std::span<const double> trace, double fraction) {
  if (trace.empty()) return 0.0;
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(trace.size()))));
  const auto tail = trace.subspan(trace.size() - std::min(n, trace.size()));
  return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());
}

// First step t such that the trailing moving average (window W) stays
// within `band` (relative) of the final-fraction mean at every step >= t.
// Returns trace.size() if even the last average is outside the band.
inline std::size_t convergence_iteration(std::span<const double> trace, std::size_t window, double band,
                                         double final_fraction) {
  const std::size_t n = trace.size();
  if (n == 0) return 0;
  const std::size_t W = std::clamp<std::size_t>(window, 1, n);
  const double target = tail_mean(trace, final_fraction);
  const double tol = band * std::abs(target);
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + trace[i];
  for (std::size_t t = n; t-- > W - 1;) {
    const double ma = (prefix[t + 1] - prefix[t + 1 - W]) / static_cast<double>(W);
    if (std::abs(ma - target) > tol) return t + 1;
  }
  return W - 1;
}

// ---------------------------------------------------------------------------
// Records

struct RunRecord {
  Approach approach = Approach::wolf_phc;
  std::uint64_t seed = 0;
  std::string axis = "p_max_dbm";
  double axis_value = 0.0;
  std::uint64_t config_hash = 0;

  std::vector<double> rewards;
  std::vector<double> rates;
  std::vector<double> sum_powers;
  std::vector<double> jam_powers;
  std::vector<double> episode_avg_rates;

  std::size_t n_steps = 0;
  std::size_t steps_per_episode = 0;
  std::size_t convergence_iteration = 0;
  double final_avg_rate = 0.0;
  json metadata;  // config echo, codec summary, overrides

  bool operator==(const RunRecord&) const = default;
};

inline json codec_summary(const StateCodec& sc, const ActionCodec& ac) {
  return {{"state_space_size", sc.size()},
          {"action_space_size", ac.size()},
          {"jam_power_edges_dbm", sc.jam_power_bins().edges()},
          {"sinr_edges_db", sc.sinr_bins().edges()},
          {"channel_edges_db", sc.channel_bins().edges()},
          {"power_fractions", ac.power_fractions()},
          {"n_power_combos", ac.n_power_combos()},
          {"phase_levels", ac.phase_levels()},
          {"n_groups", ac.n_groups()}};
}

// Tercile-style channel bins from warm-up draws of the composite gain
// under random phase profiles.
inline BinEdges calibrate_channel_bins(const ExperimentConfig& cfg, const Geometry& geom, const ActionCodec& codec,
                                       LinkMode mode, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::warmup);
  std::vector<double> samples;
  samples.reserve(cfg.codec.warmup_draws);
  for (std::size_t d = 0; d < cfg.codec.warmup_draws; ++d) {
    const ChannelSet ch = generate_channels(geom, cfg.pathloss, cfg.environment.dims, rng);
    const LinkCoefficients links(ch, transmit_beamformer(ch));
    const PhaseShiftMatrix phi = codec.phase_profile(uniform_index(rng, codec.n_phase_configs()));
    double mean = 0.0;
    for (std::size_t k = 0; k < ch.n_ues(); ++k) mean += std::abs(links.amplitude(k, k, phi, mode));
    samples.push_back(StateCodec::magnitude_db(mean / static_cast<double>(ch.n_ues())));
  }
  return BinEdges::quantiles(std::move(samples), cfg.codec.channel_bins);
}

struct RunOptions {
  bool keep_traces = true;
  std::vector<std::string> overrides;
  std::optional<fs::path> checkpoint;  // learner state after the last step
};

// Everything a run needs besides the agent: placed geometry, codecs, cell.
struct RunContext {
  Geometry geometry;
  ActionCodec action_codec;
  StateCodec state_codec;
  Environment env;
};

inline RunContext make_run_context(const ExperimentConfig& cfg, Approach approach, std::uint64_t seed) {
  Geometry base = cfg.geometry;
  Rng geo_rng = make_rng(seed, Stream::geometry);
  Geometry geom = place_ues(base, cfg.n_ues, geo_rng);

  EnvironmentConfig env_cfg = cfg.environment;
  env_cfg.irs_enabled = approach != Approach::no_irs;
  const LinkMode mode = env_cfg.irs_enabled ? LinkMode::with_irs : LinkMode::direct_only;

  ActionCodec ac(cfg.codec.power_fractions, cfg.n_ues, env_cfg.p_max_w(), cfg.codec.phase_levels, cfg.codec.n_groups,
                 env_cfg.dims.n_irs_elements);
  StateCodec sc(BinEdges::uniform(cfg.codec.jam_lo_dbm, cfg.codec.jam_hi_dbm, cfg.codec.jam_bins),
                BinEdges::uniform(cfg.codec.sinr_lo_db, cfg.codec.sinr_hi_db, cfg.codec.sinr_bins),
                calibrate_channel_bins(cfg, geom, ac, mode, seed));
  Environment env(env_cfg, geom, cfg.pathloss, cfg.jammer, seed);
  return RunContext{std::move(geom), std::move(ac), std::move(sc), std::move(env)};
}

// Runs the episode loop for one approach: observe, act, step the cell,
// learn. Deterministic in (config, approach, seed).
inline RunRecord run_training(const ExperimentConfig& cfg, Approach approach, std::uint64_t seed,
                              const RunOptions& opts = {}) {
  cfg.validate();
  RunContext ctx = make_run_context(cfg, approach, seed);
  Environment& env = ctx.env;
  const ActionCodec& ac = ctx.action_codec;
  const StateCodec& sc = ctx.state_codec;

  std::optional<TabularAgent> learner;
  if (approach == Approach::wolf_phc || approach == Approach::fast_q)
    learner.emplace(approach, sc.size(), ac.size(), cfg.agent, make_rng(seed, Stream::agent));
  GreedyBaseline greedy(ac);
  Rng random_rng = make_rng(seed, Stream::agent);
  const PhaseShiftMatrix flat_phases(cfg.environment.dims.n_irs_elements);

  const std::size_t T = cfg.training.steps_per_episode;
  const std::size_t total = cfg.training.n_episodes * T;
  RunRecord rec;
  rec.approach = approach;
  rec.seed = seed;
  rec.axis_value = cfg.environment.p_max_dbm;
  rec.config_hash = config_hash(cfg);
  rec.n_steps = total;
  rec.steps_per_episode = T;
  std::vector<double> rewards(total), rates(total), sum_powers(total), jam_powers(total);
  rec.episode_avg_rates.reserve(cfg.training.n_episodes);

  std::size_t step = 0;
  for (std::size_t ep = 0; ep < cfg.training.n_episodes; ++ep) {
    if (ep > 0) env.begin_episode();
    double ep_rate = 0.0;
    for (std::size_t t = 0; t < T; ++t, ++step) {
      const StateIndex s = sc.quantize(env.observation());
      StepOutcome out;
      ActionIndex a = 0;
      switch (approach) {
        case Approach::wolf_phc:
        case Approach::fast_q:
          a = learner->select(s);
          break;
        case Approach::greedy:
          a = greedy.choose(env);
          break;
        case Approach::random:
          a = uniform_index(random_rng, ac.size());
          break;
        case Approach::no_irs:
          break;
      }
      if (approach == Approach::no_irs) {
        const NoIrsChoice choice =
            optimal_pa_no_irs(env.channels(), env.beamformers(), env.previous_jam(), env.noise_w(), ac);
        out = env.step(choice.power, flat_phases);
      } else {
        const DecodedAction act = ac.decode(a);
        out = env.step(act.power, act.phases);
      }
      if (learner) learner->learn(s, a, out.reward, sc.quantize(out.next_observation));

      rewards[step] = out.reward;
      rates[step] = out.rate;
      sum_powers[step] = out.sum_power;
      jam_powers[step] = out.jam.total_power();
      ep_rate += out.rate;
    }
    if (learner) learner->end_episode();
    rec.episode_avg_rates.push_back(ep_rate / static_cast<double>(T));
  }

  rec.convergence_iteration = convergence_iteration(rates, cfg.training.window(), cfg.training.convergence_band,
                                                    cfg.training.final_fraction);
  rec.final_avg_rate = tail_mean(rates, cfg.training.final_fraction);
  rec.metadata = {{"config", to_json(cfg)},
                  {"overrides", opts.overrides},
                  {"codec", codec_summary(sc, ac)},
                  {"ue_positions", [&] {
                     json a = json::array();
                     for (const Point& p : ctx.geometry.ues) a.push_back({p.x, p.y});
                     return a;
                   }()}};
  if (learner && opts.checkpoint) save_checkpoint(*learner, rec.metadata["codec"], *opts.checkpoint);
  if (opts.keep_traces) {
    rec.rewards = std::move(rewards);
    rec.rates = std::move(rates);
    rec.sum_powers = std::move(sum_powers);
    rec.jam_powers = std::move(jam_powers);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Persistence

inline std::string run_stem(const RunRecord& r) {
  return "run_" + std::string(to_string(r.approach)) + "_" + r.axis + "-" + format_double(r.axis_value) + "_seed" +
         std::to_string(r.seed);
}

inline json run_metadata(const RunRecord& r) {
  json m = r.metadata;
  m["approach"] = std::string(to_string(r.approach));
  m["seed"] = r.seed;
  m["axis"] = r.axis;
  m["axis_value"] = r.axis_value;
  m["config_hash"] = hex64(r.config_hash);
  m["n_steps"] = r.n_steps;
  m["steps_per_episode"] = r.steps_per_episode;
  m["convergence_iteration"] = r.convergence_iteration;
  m["final_avg_rate"] = r.final_avg_rate;
  return m;
}

// Writes <stem>.csv (per-step trace) and <stem>.json (metadata).
inline void write_run(const RunRecord& r, const fs::path& dir) {
  if (r.rates.size() != r.n_steps) throw std::logic_error("write_run: record has no traces");
  fs::create_directories(dir);
  const fs::path stem = dir / run_stem(r);
  {
    std::ofstream csv(fs::path(stem).concat(".csv"), std::ios::binary);
    if (!csv) throw IoError("write_run: cannot open " + stem.string() + ".csv");
    csv << "step,episode,reward,rate,sum_power_w,jam_power_w\n";
    for (std::size_t i = 0; i < r.n_steps; ++i)
      csv << i << ',' << i / r.steps_per_episode << ',' << format_double(r.rewards[i]) << ','
          << format_double(r.rates[i]) << ',' << format_double(r.sum_powers[i]) << ','
          << format_double(r.jam_powers[i]) << '\n';
    if (!csv) throw IoError("write_run: write failed for " + stem.string() + ".csv");
  }
  std::ofstream meta(fs::path(stem).concat(".json"), std::ios::binary);
  meta << run_metadata(r).dump(2) << '\n';
  if (!meta) throw IoError("write_run: write failed for " + stem.string() + ".json");
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

// Loads a persisted run and recomputes its metrics from the trace.
inline RunRecord load_run(const fs::path& metadata_path) {
  std::ifstream meta_in(metadata_path);
  if (!meta_in) throw IoError("load_run: cannot open " + metadata_path.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw IoError("load_run: " + metadata_path.string() + ": " + e.what());
  }
  RunRecord r;
  r.approach = parse_approach(meta.at("approach").get<std::string>());
  r.seed = meta.at("seed").get<std::uint64_t>();
  r.axis = meta.at("axis").get<std::string>();
  r.axis_value = meta.at("axis_value").get<double>();
  r.config_hash = std::stoull(meta.at("config_hash").get<std::string>(), nullptr, 16);
  r.n_steps = meta.at("n_steps").get<std::size_t>();
  r.steps_per_episode = meta.at("steps_per_episode").get<std::size_t>();
  r.metadata = meta;
  for (const char* k : {"approach", "seed", "axis", "axis_value", "config_hash", "n_steps", "steps_per_episode",
                        "convergence_iteration", "final_avg_rate"})
    r.metadata.erase(k);

  fs::path csv_path = metadata_path;
  csv_path.replace_extension(".csv");
  std::ifstream csv(csv_path);
  if (!csv) throw IoError("load_run: cannot open " + csv_path.string());
  std::string line;
  std::getline(csv, line);
  if (line != "step,episode,reward,rate,sum_power_w,jam_power_w")
    throw IoError("load_run: unexpected CSV header in " + csv_path.string());
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> cols;
    std::string_view sv(line);
    for (std::size_t pos = 0;;) {
      const auto comma = sv.find(',', pos);
      cols.push_back(sv.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cols.size() != 6) throw IoError("load_run: malformed row in " + csv_path.string());
    r.rewards.push_back(parse_double(cols[2]));
    r.rates.push_back(parse_double(cols[3]));
    r.sum_powers.push_back(parse_double(cols[4]));
    r.jam_powers.push_back(parse_double(cols[5]));
  }
  if (r.rates.size() != r.n_steps) throw IoError("load_run: truncated trace in " + csv_path.string());

  const json& tr = meta.at("config").at("training");
  TrainingConfig t;
  t.steps_per_episode = r.steps_per_episode;
  t.convergence_window = tr.at("convergence_window").get<std::size_t>();
  const double band = tr.at("convergence_band").get<double>();
  const double frac = tr.at("final_fraction").get<double>();
  r.convergence_iteration = convergence_iteration(r.rates, t.window(), band, frac);
  r.final_avg_rate = tail_mean(r.rates, frac);
  for (std::size_t e = 0; e * r.steps_per_episode < r.n_steps; ++e) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.steps_per_episode; ++i) s += r.rates[e * r.steps_per_episode + i];
    r.episode_avg_rates.push_back(s / static_cast<double>(r.steps_per_episode));
  }
  return r;
}

inline std::vector<RunRecord> load_runs(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() == ".json" && p.filename().string().starts_with("run_")) paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> out;
  for (const auto& p : paths) out.push_back(load_run(p));
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

struct SummaryRow {
  Approach approach = Approach::wolf_phc;
  std::string axis;
  double axis_value = 0.0;
  std::size_t n_runs = 0;
  double mean_final_rate = 0.0;
  double std_final_rate = 0.0;
  double mean_convergence_iteration = 0.0;

  bool operator==(const SummaryRow&) const = default;
};

// One row per (approach, axis value), ordered by approach then axis value.
// Each group is reduced in seed order so the result does not depend on the
// order the records arrive in.
inline std::vector<SummaryRow> summarize(std::span<const RunRecord> records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  std::map<std::pair<int, double>, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : records) groups[{static_cast<int>(r.approach), r.axis_value}].push_back(&r);
  std::vector<SummaryRow> rows;
  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(), [](const RunRecord* a, const RunRecord* b) { return a->seed < b->seed; });
    SummaryRow row;
    row.approach = group.front()->approach;
    row.axis = group.front()->axis;
    row.axis_value = key.second;
    row.n_runs = group.size();
    double sum = 0.0, conv = 0.0;
    for (const RunRecord* r : group) {
      sum += r->final_avg_rate;
      conv += static_cast<double>(r->convergence_iteration);
    }
    const double n = static_cast<double>(group.size());
    row.mean_final_rate = sum / n;
    row.mean_convergence_iteration = conv / n;
    double ss = 0.0;
    for (const RunRecord* r : group) ss += (r->final_avg_rate - row.mean_final_rate) * (r->final_avg_rate - row.mean_final_rate);
    row.std_final_rate = group.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

inline std::string summary_csv(std::span<const SummaryRow> rows) {
  std::ostringstream os;
  os << "approach,axis,axis_value,n_runs,mean_final_rate,std_final_rate,mean_convergence_iteration\n";
  for (const SummaryRow& r : rows)
    os << to_string(r.approach) << ',' << r.axis << ',' << format_double(r.axis_value) << ',' << r.n_runs << ','
       << format_double(r.mean_final_rate) << ',' << format_double(r.std_final_rate) << ','
       << format_double(r.mean_convergence_iteration) << '\n';
  return os.str();
}

inline void write_summary(std::span<const SummaryRow> rows, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << summary_csv(rows);
  if (!out) throw IoError("write_summary: write failed for " + file.string());
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { p_max_dbm, n_irs_elements };

inline std::string_view to_string(SweepAxis a) { return a == SweepAxis::p_max_dbm ? "p_max_dbm" : "n_irs_elements"; }

inline SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "p_max_dbm" || s == "p_max") return SweepAxis::p_max_dbm;
  if (s == "n_irs_elements" || s == "m_elements") return SweepAxis::n_irs_elements;
  throw ConfigError("axis", "expected p_max or m_elements, got '" + std::string(s) + "'");
}

inline std::vector<double> axis_values(const ExperimentConfig& cfg, SweepAxis axis) {
  if (axis == SweepAxis::p_max_dbm) return cfg.sweep.p_max_dbm;
  std::vector<double> v;
  for (std::size_t m : cfg.sweep.n_irs_elements) v.push_back(static_cast<double>(m));
  return v;
}

inline ExperimentConfig at_axis_value(ExperimentConfig cfg, SweepAxis axis, double value) {
  if (axis == SweepAxis::p_max_dbm)
    cfg.environment.p_max_dbm = value;
  else
    cfg.environment.dims.n_irs_elements = static_cast<std::size_t>(value);
  return cfg;
}

struct SweepFailure {
  Approach approach;
  double axis_value;
  std::uint64_t seed;
  std::string error;
};

struct SweepOptions {
  std::optional<fs::path> out_dir;
  std::size_t parallel = 1;
  bool keep_traces = false;
  std::vector<std::string> overrides;
};

struct SweepResult {
  std::vector<RunRecord> records;  // job order: axis value, approach, seed
  std::vector<SweepFailure> failures;
};

// Cartesian product of axis values x approaches x seeds. Runs are
// independent; up to `parallel` execute at once and finished runs are
// handed to a single collector that writes them to disk.
inline SweepResult run_sweep(const ExperimentConfig& cfg, SweepAxis axis, std::span<const Approach> approaches,
                             std::span<const std::uint64_t> seeds, const SweepOptions& opts = {}) {
  const auto values = axis_values(cfg, axis);
  if (values.empty()) throw ConfigError(axis == SweepAxis::p_max_dbm ? "sweep.p_max_dbm" : "sweep.n_irs_elements",
                                        "sweep axis has no values");
  struct Job {
    double value;
    Approach approach;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double v : values)
    for (Approach a : approaches)
      for (std::uint64_t s : seeds) jobs.push_back({v, a, s});

  std::vector<std::optional<RunRecord>> slots(jobs.size());
  std::vector<std::optional<SweepFailure>> failed(jobs.size());
  std::mutex collector;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      try {
        RunOptions ro;
        ro.keep_traces = opts.keep_traces || opts.out_dir.has_value();
        ro.overrides = opts.overrides;
        RunRecord rec = run_training(at_axis_value(cfg, axis, job.value), job.approach, job.seed, ro);
        rec.axis = std::string(to_string(axis));
        rec.axis_value = job.value;
        std::lock_guard lock(collector);
        if (opts.out_dir) write_run(rec, *opts.out_dir);
        if (!opts.keep_traces) {
          rec.rewards = {};
          rec.rates = {};
          rec.sum_powers = {};
          rec.jam_powers = {};
        }
        slots[i] = std::move(rec);
      } catch (const std::exception& e) {
        std::lock_guard lock(collector);
        failed[i] = SweepFailure{job.approach, job.value, job.seed, e.what()};
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(opts.parallel, 1, std::max<std::size_t>(1, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  SweepResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (slots[i]) result.records.push_back(std::move(*slots[i]));
    if (failed[i]) result.failures.push_back(std::move(*failed[i]));
  }
  if (opts.out_dir && !result.failures.empty()) {
    std::ofstream f(*opts.out_dir / "failures.csv", std::ios::binary);
    f << "approach,axis_value,seed,error\n";
    for (const auto& fl : result.failures)
      f << to_string(fl.approach) << ',' << format_double(fl.axis_value) << ',' << fl.seed << ",\"" << fl.error << "\"\n";
  }
  return result;
}

}  // namespace irsaj
