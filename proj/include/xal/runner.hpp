/*
 * Copyright 2026 The XAL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Executes an ExperimentConfig and writes its artifacts:
//
//   tracking     query_log.csv, bias_history.csv
//   persistence  persistence.csv
//   batch        curves.csv, batch_example.json, batch_example.txt
//   clusters     clusters.json, query_log.csv, bias_history.csv
//
// plus manifest.json (config, seeds, version, timestamp) for every kind.
// All artifacts except the manifest timestamp are a pure function of the
// configuration; worker count does not change them.

#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xal/batch.hpp"
#include "xal/cluster.hpp"
#include "xal/config.hpp"
#include "xal/learner.hpp"
#include "xal/report.hpp"

#ifndef XAL_VERSION
#define XAL_VERSION "0.1.0"
#endif

namespace xal {

struct RunOptions {
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::string preset;       // recorded in the manifest when set
};

struct RunSummary {
  std::filesystem::path out_dir;
  std::vector<std::string> files;
  nlohmann::json summary;
};

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json json_opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

/// Writes the tracking artifacts for a set of completed runs.
inline void write_tracking_artifacts(const std::filesystem::path& dir, const std::string& config_text,
                                     const std::vector<std::string>& regions,
                                     const std::vector<RunResult>& runs, RunSummary& out) {
  std::ostringstream log, hist;
  report::write_config_header(log, config_text);
  report::write_query_log_header(log, regions);
  report::write_config_header(hist, config_text);
  report::write_bias_history_header(hist);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    report::write_query_log(log, r, runs[r].seed, regions, runs[r].log);
    report::write_bias_history(hist, r, runs[r].seed, runs[r].history);
  }
  report::write_text_file(dir / "query_log.csv", log.str());
  report::write_text_file(dir / "bias_history.csv", hist.str());
  out.files.push_back("query_log.csv");
  out.files.push_back("bias_history.csv");
}

inline RunSummary run_configured(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                 const RunOptions& opt = {}) {
  namespace fs = std::filesystem;
  LoadReport load;
  const TabularDataset data = load_experiment_dataset(cfg.dataset, &load);
  const std::string config_text = cfg.to_text();
  fs::create_directories(out_dir);
  RunSummary out;
  out.out_dir = out_dir;
  std::vector<std::uint64_t> seeds;

  switch (cfg.experiment) {
    case ExperimentKind::tracking: {
      const RegionSpec regions = experiment_regions(cfg, data);
      const auto candidates = initial_candidates(cfg, data);
      for (std::size_t r = 0; r < cfg.n_runs; ++r) seeds.push_back(run_seed(cfg.seed, r));
      const auto runs = run_indexed<RunResult>(
          cfg.n_runs,
          [&](std::size_t r) {
            RunSpec rs{cfg.initial_size, candidates, cfg.steps, seeds[r]};
            return run_experiment(data, regions, rs, cfg.learner);
          },
          opt.threads);
      write_tracking_artifacts(out_dir, config_text, regions.names(), runs, out);
      out.summary["regions"] = regions.names();
      break;
    }
    case ExperimentKind::persistence: {
      const RegionSpec regions = experiment_regions(cfg, data);
      PersistenceSpec ps{cfg.n_pools, cfg.steps, cfg.initial_size, cfg.seed};
      const auto res = pool_persistence_study(data, regions, ps, cfg.learner, opt.threads);
      seeds = res.pool_seeds;
      std::ostringstream os;
      report::write_config_header(os, config_text);
      report::write_persistence(os, res);
      report::write_text_file(out_dir / "persistence.csv", os.str());
      out.files.push_back("persistence.csv");
      auto fits = nlohmann::json::array();
      for (std::size_t r = 0; r < res.regions.size(); ++r) {
        fits.push_back({{"region", res.regions[r]},
                        {"slope", res.fits[r].slope},
                        {"intercept", res.fits[r].intercept},
                        {"r2", detail::json_opt(res.fits[r].r2)},
                        {"n", res.fits[r].n},
                        {"excluded", res.excluded[r]}});
      }
      out.summary["fits"] = fits;
      break;
    }
    case ExperimentKind::batch: {
      StrategyStudySpec ss = cfg.batch;
      ss.initial_size = cfg.initial_size;
      ss.n_runs = cfg.n_runs;
      ss.seed = cfg.seed;
      const auto curves = evaluate_strategies(data, ss, cfg.learner, opt.threads);
      for (std::size_t r = 0; r < ss.n_runs; ++r) seeds.push_back(mix_seed(ss.seed, 0xBA7C + r));
      std::ostringstream os;
      report::write_config_header(os, config_text);
      report::write_curves(os, curves);
      report::write_text_file(out_dir / "curves.csv", os.str());
      out.files.push_back("curves.csv");

      // One rendered batch from the first run's initial model.
      const auto [train_rows, test_rows] = split_rows(data.size(), ss.test_fraction, ss.seed);
      const TabularDataset train = data.subset(train_rows);
      RunSpec rs;
      rs.initial_size = ss.initial_size;
      rs.seed = seeds.front();
      Learner learner(train, RegionSpec(), cfg.learner, sample_initial_pool(train.size(), rs),
                      rs.seed);
      BatchRequest req{ss.batch_size, ss.strategies.back(), cfg.batch_features};
      const auto batch = compose_batch(learner, req, mix_seed(rs.seed, 1));
      auto bj = batch_to_json(batch, train, cfg.batch_features);
      bj["strategy"] = to_string(req.strategy);
      bj["config"] = config_text;
      report::write_text_file(out_dir / "batch_example.json", bj.dump(2) + "\n");
      report::write_text_file(out_dir / "batch_example.txt",
                              render_batch_explanation(batch, train, cfg.batch_features));
      out.files.push_back("batch_example.json");
      out.files.push_back("batch_example.txt");
      auto finals = nlohmann::json::object();
      for (auto s : ss.strategies) finals[to_string(s)] = detail::json_opt(curves.mean_mcc(s, ss.rounds));
      out.summary["final_mean_mcc"] = finals;
      break;
    }
    case ExperimentKind::clusters: {
      const std::uint64_t seed = run_seed(cfg.seed, 0);
      seeds.push_back(seed);
      RunSpec rs{cfg.initial_size, initial_candidates(cfg, data), cfg.steps, seed};
      Learner learner(data, RegionSpec(), cfg.learner, sample_initial_pool(data.size(), rs), seed);
      SimulatedOracle oracle(data);
      for (std::size_t s = 0; s < cfg.cluster.warmup_steps; ++s) learner.step(oracle);
      ClusterSpec cs = cfg.cluster;
      if (cs.labels.mode == LabelMode::top_m && cs.labels.top_m == 0) {
        cs.labels.top_m = cfg.learner.explainer.num_features;
      }
      const ClusterEpoch epoch = cluster_explanations(learner, cs, opt.threads);
      auto report = cluster_report(epoch.model, epoch.vocabulary, cfg.learner.explainer.num_features);
      report["config"] = config_text;
      report["epoch_round"] = learner.state().round;
      report::write_text_file(out_dir / "clusters.json", report.dump(2) + "\n");
      out.files.push_back("clusters.json");
      const RunResult run = track_clusters(data, epoch.model, rs, cfg.learner);
      write_tracking_artifacts(out_dir, config_text, epoch.model.names(), {run}, out);
      out.summary["k"] = epoch.model.k();
      out.summary["agreement"] = epoch.model.agreement;
      out.summary["overlap"] = epoch.model.overlap;
      break;
    }
  }

  nlohmann::json manifest{{"tool", "xal"},
                          {"version", XAL_VERSION},
                          {"experiment", to_string(cfg.experiment)},
                          {"config", config_text},
                          {"seeds", seeds},
                          {"dataset_rows", data.size()},
                          {"schema_fingerprint", data.schema_fingerprint()},
                          {"files", out.files},
                          {"summary", out.summary},
                          {"created_utc", detail::utc_timestamp()}};
  if (!opt.preset.empty()) manifest["preset"] = opt.preset;
  if (cfg.dataset.kind == DatasetKind::csv) {
    manifest["load_report"] = {{"rows_read", load.rows_read},
                               {"rows_kept", load.rows_kept},
                               {"filtered_out", load.filtered_out},
                               {"dropped_missing", load.dropped_missing}};
  }
  report::write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  out.files.push_back("manifest.json");
  return out;
}

}  // namespace xal
