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

// Experiment configuration in the key-value format, named presets, and
// dataset resolution. Every key is validated before anything runs; errors
// carry the offending line.
//
//   experiment = tracking | persistence | batch | clusters
//   dataset.kind = toy | csv | surrogate
//   model.kind = logistic_regression | adaboost_stumps
//   loop.steps = 200
//
// to_text() emits every key, defaults included, so an artifact can embed the
// exact configuration that produced it.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xal/batch.hpp"
#include "xal/cluster.hpp"
#include "xal/common.hpp"
#include "xal/dataset.hpp"
#include "xal/keyvalue.hpp"
#include "xal/learner.hpp"

#ifndef XAL_DEFAULT_DATA_DIR
#define XAL_DEFAULT_DATA_DIR "data"
#endif

namespace xal {

enum class ExperimentKind { tracking, persistence, batch, clusters };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::tracking:
      return "tracking";
    case ExperimentKind::persistence:
      return "persistence";
    case ExperimentKind::batch:
      return "batch";
    case ExperimentKind::clusters:
      return "clusters";
  }
  return "?";
}

enum class DatasetKind { toy, csv, surrogate };

inline const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::toy:
      return "toy";
    case DatasetKind::csv:
      return "csv";
    case DatasetKind::surrogate:
      return "surrogate";
  }
  return "?";
}

struct DatasetSpec {
  DatasetKind kind = DatasetKind::toy;
  std::uint64_t seed = 7;
  std::size_t n_per_gaussian = 400;
  std::string manifest;  // csv: relative to the data directory unless absolute
  std::size_t rows = 2000;
  std::size_t features = 100;
  std::size_t informative = 10;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::tracking;
  DatasetSpec dataset;
  LearnerConfig learner;
  std::string region_kind = "group";  // group | none
  std::vector<std::string> region_levels;
  std::size_t initial_size = 50;
  std::vector<std::string> initial_groups;
  std::size_t steps = 200;
  std::size_t n_runs = 1;
  std::uint64_t seed = 1;
  std::size_t n_pools = 30;
  StrategyStudySpec batch;
  std::vector<std::string> batch_features;
  ClusterSpec cluster;
  std::string output = "out";

  static ExperimentConfig from_document(const kv::Document& doc);
  static ExperimentConfig parse(std::string_view text) { return from_document(kv::Document::parse(text)); }
  static ExperimentConfig load(const std::string& path) { return from_document(kv::Document::load(path)); }

  kv::Document to_document() const;
  std::string to_text() const { return to_document().to_text(); }
};

namespace detail {

inline std::string join(const std::vector<std::string>& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + v[i];
  return out;
}

inline std::size_t to_size(const kv::Entry& e, std::size_t min = 0) {
  const auto v = parse_int(e.value);
  if (!v || *v < 0) throw ConfigError(e.key + " must be a non-negative integer", e.line);
  if (static_cast<std::size_t>(*v) < min) {
    throw ConfigError(e.key + " must be >= " + std::to_string(min), e.line);
  }
  return static_cast<std::size_t>(*v);
}

inline std::uint64_t to_seed(const kv::Entry& e) {
  const auto v = parse_int(e.value);
  if (!v || *v < 0) throw ConfigError(e.key + " must be a non-negative integer", e.line);
  return static_cast<std::uint64_t>(*v);
}

inline double to_real(const kv::Entry& e) {
  const auto v = parse_double(e.value);
  if (!v || !std::isfinite(*v)) throw ConfigError(e.key + " must be a number", e.line);
  return *v;
}

inline double to_positive(const kv::Entry& e) {
  const double v = to_real(e);
  if (!(v > 0.0)) throw ConfigError(e.key + " must be > 0", e.line);
  return v;
}

inline bool to_bool(const kv::Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError(e.key + " must be true or false", e.line);
}

inline std::vector<std::string> to_list(const kv::Entry& e) {
  std::vector<std::string> out;
  if (e.value.empty()) return out;
  for (auto& s : split(e.value, ',')) {
    if (s.empty()) throw ConfigError(e.key + " has an empty list item", e.line);
    out.push_back(std::move(s));
  }
  return out;
}

template <typename T, typename Fn>
T one_of(const kv::Entry& e, std::initializer_list<T> options, Fn name) {
  std::string allowed;
  for (T o : options) {
    if (e.value == name(o)) return o;
    allowed += (allowed.empty() ? "" : ", ") + std::string(name(o));
  }
  throw ConfigError(e.key + " must be one of: " + allowed, e.line);
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_document(const kv::Document& doc) {
  using namespace detail;
  ExperimentConfig c;
  auto& L = c.learner;
  auto& X = L.explainer;
  auto& B = c.batch;
  auto& C = c.cluster;
  const std::map<std::string, std::function<void(const kv::Entry&)>> handlers{
      {"experiment",
       [&](const kv::Entry& e) {
         c.experiment = one_of(e,
                               {ExperimentKind::tracking, ExperimentKind::persistence,
                                ExperimentKind::batch, ExperimentKind::clusters},
                               [](ExperimentKind k) { return to_string(k); });
       }},
      {"dataset.kind",
       [&](const kv::Entry& e) {
         c.dataset.kind = one_of(e, {DatasetKind::toy, DatasetKind::csv, DatasetKind::surrogate},
                                 [](DatasetKind k) { return to_string(k); });
       }},
      {"dataset.seed", [&](const kv::Entry& e) { c.dataset.seed = to_seed(e); }},
      {"dataset.n_per_gaussian", [&](const kv::Entry& e) { c.dataset.n_per_gaussian = to_size(e, 1); }},
      {"dataset.manifest", [&](const kv::Entry& e) { c.dataset.manifest = e.value; }},
      {"dataset.rows", [&](const kv::Entry& e) { c.dataset.rows = to_size(e, 1); }},
      {"dataset.features", [&](const kv::Entry& e) { c.dataset.features = to_size(e, 1); }},
      {"dataset.informative", [&](const kv::Entry& e) { c.dataset.informative = to_size(e); }},
      {"model.kind",
       [&](const kv::Entry& e) {
         try {
           L.model.kind = parse_model_kind(e.value);
         } catch (const Error&) {
           throw ConfigError("model.kind must be logistic_regression or adaboost_stumps", e.line);
         }
       }},
      {"model.l2",
       [&](const kv::Entry& e) {
         L.model.logistic.l2 = to_real(e);
         if (L.model.logistic.l2 < 0) throw ConfigError("model.l2 must be >= 0", e.line);
       }},
      {"model.tol", [&](const kv::Entry& e) { L.model.logistic.tol = to_positive(e); }},
      {"model.max_iterations",
       [&](const kv::Entry& e) { L.model.logistic.max_iterations = to_size(e, 1); }},
      {"model.solver",
       [&](const kv::Entry& e) {
         if (e.value == "newton") {
           L.model.logistic.solver = LogisticSolver::newton;
         } else if (e.value == "gradient_descent") {
           L.model.logistic.solver = LogisticSolver::gradient_descent;
         } else {
           throw ConfigError("model.solver must be newton or gradient_descent", e.line);
         }
       }},
      {"model.learning_rate", [&](const kv::Entry& e) { L.model.logistic.learning_rate = to_positive(e); }},
      {"model.n_stumps", [&](const kv::Entry& e) { L.model.n_stumps = to_size(e, 1); }},
      {"explainer.samples", [&](const kv::Entry& e) { X.num_samples = to_size(e, 2); }},
      {"explainer.kernel_width",
       [&](const kv::Entry& e) {
         if (e.value == "auto") {
           X.kernel_width.reset();
         } else {
           X.kernel_width = to_positive(e);
         }
       }},
      {"explainer.k", [&](const kv::Entry& e) { X.num_features = to_size(e, 1); }},
      {"explainer.ridge_lambda", [&](const kv::Entry& e) { X.ridge_lambda = to_positive(e); }},
      {"explainer.seed", [&](const kv::Entry& e) { X.seed = to_seed(e); }},
      {"explainer.max_bins", [&](const kv::Entry& e) { L.max_bins = to_size(e, 2); }},
      {"regions.kind",
       [&](const kv::Entry& e) {
         if (e.value != "group" && e.value != "none") {
           throw ConfigError("regions.kind must be group or none", e.line);
         }
         c.region_kind = e.value;
       }},
      {"regions.levels", [&](const kv::Entry& e) { c.region_levels = to_list(e); }},
      {"loop.initial_size", [&](const kv::Entry& e) { c.initial_size = to_size(e, 1); }},
      {"loop.initial_groups", [&](const kv::Entry& e) { c.initial_groups = to_list(e); }},
      {"loop.steps", [&](const kv::Entry& e) { c.steps = to_size(e); }},
      {"loop.n_runs", [&](const kv::Entry& e) { c.n_runs = to_size(e, 1); }},
      {"loop.seed", [&](const kv::Entry& e) { c.seed = to_seed(e); }},
      {"loop.explain", [&](const kv::Entry& e) { L.explain_queries = to_bool(e); }},
      {"persistence.n_pools", [&](const kv::Entry& e) { c.n_pools = to_size(e, 1); }},
      {"batch.size", [&](const kv::Entry& e) { B.batch_size = to_size(e, 1); }},
      {"batch.rounds", [&](const kv::Entry& e) { B.rounds = to_size(e, 1); }},
      {"batch.test_fraction",
       [&](const kv::Entry& e) {
         B.test_fraction = to_real(e);
         if (!(B.test_fraction > 0 && B.test_fraction < 1)) {
           throw ConfigError("batch.test_fraction must lie in (0, 1)", e.line);
         }
       }},
      {"batch.strategies",
       [&](const kv::Entry& e) {
         B.strategies.clear();
         for (const auto& s : to_list(e)) {
           try {
             B.strategies.push_back(parse_batch_strategy(s));
           } catch (const ConfigError& err) {
             throw ConfigError(err.what(), e.line);
           }
         }
         if (B.strategies.empty()) throw ConfigError("batch.strategies is empty", e.line);
       }},
      {"batch.features", [&](const kv::Entry& e) { c.batch_features = to_list(e); }},
      {"cluster.k_min", [&](const kv::Entry& e) { C.choose.k_min = to_size(e, 1); }},
      {"cluster.k_max", [&](const kv::Entry& e) { C.choose.k_max = to_size(e, 1); }},
      {"cluster.k",
       [&](const kv::Entry& e) {
         if (e.value == "auto") {
           C.fixed_k.reset();
         } else {
           C.fixed_k = to_size(e, 1);
         }
       }},
      {"cluster.threshold", [&](const kv::Entry& e) { C.choose.threshold = to_positive(e); }},
      {"cluster.patience", [&](const kv::Entry& e) { C.choose.patience = to_size(e, 1); }},
      {"cluster.n_init", [&](const kv::Entry& e) { C.choose.kmeans.n_init = to_size(e, 1); }},
      {"cluster.seed", [&](const kv::Entry& e) { C.choose.seed = to_seed(e); }},
      {"cluster.label_mode",
       [&](const kv::Entry& e) {
         if (e.value == "top_m") {
           C.labels.mode = LabelMode::top_m;
         } else if (e.value == "contribution_cutoff") {
           C.labels.mode = LabelMode::contribution_cutoff;
         } else {
           throw ConfigError("cluster.label_mode must be top_m or contribution_cutoff", e.line);
         }
       }},
      {"cluster.top_m",
       [&](const kv::Entry& e) { C.labels.top_m = to_size(e, 1); }},
      {"cluster.cutoff",
       [&](const kv::Entry& e) {
         C.labels.cutoff = to_real(e);
         if (C.labels.cutoff < 0) throw ConfigError("cluster.cutoff must be >= 0", e.line);
       }},
      {"cluster.warmup_steps", [&](const kv::Entry& e) { C.warmup_steps = to_size(e); }},
      {"output", [&](const kv::Entry& e) { c.output = e.value; }},
  };
  for (const auto& e : doc.entries()) {
    const auto it = handlers.find(e.key);
    if (it == handlers.end()) throw ConfigError("unknown key '" + e.key + "'", e.line);
    it->second(e);
  }

  auto line_of = [&](std::string_view key) {
    const auto* e = doc.find(key);
    return e ? e->line : 0;
  };
  if (c.dataset.kind == DatasetKind::csv && c.dataset.manifest.empty()) {
    throw ConfigError("dataset.kind = csv requires dataset.manifest", line_of("dataset.kind"));
  }
  if (c.dataset.informative > c.dataset.features) {
    throw ConfigError("dataset.informative exceeds dataset.features", line_of("dataset.informative"));
  }
  if (X.num_samples < X.num_features + 1) {
    throw ConfigError("explainer.samples must exceed explainer.k", line_of("explainer.samples"));
  }
  if (c.dataset.kind == DatasetKind::surrogate && c.region_kind == "group") {
    throw ConfigError("the surrogate dataset has no group attribute; use regions.kind = none",
                      line_of("regions.kind"));
  }
  if (C.choose.k_max < C.choose.k_min) {
    throw ConfigError("cluster.k_max must be >= cluster.k_min", line_of("cluster.k_max"));
  }
  if (c.experiment == ExperimentKind::persistence && c.region_kind == "none") {
    throw ConfigError("a persistence study needs tracked regions", line_of("regions.kind"));
  }
  return c;
}

inline kv::Document ExperimentConfig::to_document() const {
  using detail::join;
  kv::Document d;
  const auto& L = learner;
  const auto& X = L.explainer;
  auto num = [](double v) { return format_exact(v); };
  d.add("experiment", to_string(experiment));
  d.add("dataset.kind", to_string(dataset.kind));
  switch (dataset.kind) {
    case DatasetKind::toy:
      d.add("dataset.seed", std::to_string(dataset.seed));
      d.add("dataset.n_per_gaussian", std::to_string(dataset.n_per_gaussian));
      break;
    case DatasetKind::csv:
      d.add("dataset.manifest", dataset.manifest);
      break;
    case DatasetKind::surrogate:
      d.add("dataset.seed", std::to_string(dataset.seed));
      d.add("dataset.rows", std::to_string(dataset.rows));
      d.add("dataset.features", std::to_string(dataset.features));
      d.add("dataset.informative", std::to_string(dataset.informative));
      break;
  }
  d.add("model.kind", to_string(L.model.kind));
  if (L.model.kind == ModelKind::logistic_regression) {
    d.add("model.l2", num(L.model.logistic.l2));
    d.add("model.tol", num(L.model.logistic.tol));
    d.add("model.max_iterations", std::to_string(L.model.logistic.max_iterations));
    d.add("model.solver", L.model.logistic.solver == LogisticSolver::newton ? "newton"
                                                                             : "gradient_descent");
    d.add("model.learning_rate", num(L.model.logistic.learning_rate));
  } else {
    d.add("model.n_stumps", std::to_string(L.model.n_stumps));
  }
  d.add("explainer.samples", std::to_string(X.num_samples));
  d.add("explainer.kernel_width", X.kernel_width ? num(*X.kernel_width) : "auto");
  d.add("explainer.k", std::to_string(X.num_features));
  d.add("explainer.ridge_lambda", num(X.ridge_lambda));
  d.add("explainer.seed", std::to_string(X.seed));
  d.add("explainer.max_bins", std::to_string(L.max_bins));
  d.add("regions.kind", region_kind);
  d.add("regions.levels", join(region_levels));
  d.add("loop.initial_size", std::to_string(initial_size));
  d.add("loop.initial_groups", join(initial_groups));
  d.add("loop.steps", std::to_string(steps));
  d.add("loop.n_runs", std::to_string(n_runs));
  d.add("loop.seed", std::to_string(seed));
  d.add("loop.explain", L.explain_queries ? "true" : "false");
  if (experiment == ExperimentKind::persistence) d.add("persistence.n_pools", std::to_string(n_pools));
  if (experiment == ExperimentKind::batch) {
    d.add("batch.size", std::to_string(batch.batch_size));
    d.add("batch.rounds", std::to_string(batch.rounds));
    d.add("batch.test_fraction", num(batch.test_fraction));
    std::vector<std::string> names;
    for (auto s : batch.strategies) names.push_back(to_string(s));
    d.add("batch.strategies", join(names));
    d.add("batch.features", join(batch_features));
  }
  if (experiment == ExperimentKind::clusters) {
    const auto& C = cluster;
    d.add("cluster.k", C.fixed_k ? std::to_string(*C.fixed_k) : "auto");
    d.add("cluster.k_min", std::to_string(C.choose.k_min));
    d.add("cluster.k_max", std::to_string(C.choose.k_max));
    d.add("cluster.threshold", num(C.choose.threshold));
    d.add("cluster.patience", std::to_string(C.choose.patience));
    d.add("cluster.n_init", std::to_string(C.choose.kmeans.n_init));
    d.add("cluster.seed", std::to_string(C.choose.seed));
    d.add("cluster.label_mode", C.labels.mode == LabelMode::top_m ? "top_m" : "contribution_cutoff");
    d.add("cluster.top_m", std::to_string(C.labels.top_m));
    d.add("cluster.cutoff", num(C.labels.cutoff));
    d.add("cluster.warmup_steps", std::to_string(C.warmup_steps));
  }
  d.add("output", output);
  return d;
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  const char* name;
  const char* description;
  const char* text;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> all{
      {"toy-fig2", "Quadrant bias on the four-Gaussian toy data, 50 runs x 200 queries",
       R"(experiment = tracking
dataset.kind = toy
dataset.seed = 7
dataset.n_per_gaussian = 400
model.kind = logistic_regression
explainer.k = 2
regions.kind = group
loop.initial_size = 50
loop.initial_groups = Q1,Q3
loop.steps = 200
loop.n_runs = 50
loop.seed = 1
loop.explain = true
output = out/toy-fig2
)"},
      {"propublica-fig3", "Per-race bias on ProPublica, 400 initial points, 2000 queries",
       R"(experiment = tracking
dataset.kind = csv
dataset.manifest = propublica/propublica.manifest
model.kind = logistic_regression
explainer.k = 2
regions.kind = group
regions.levels = African-American,Caucasian,Hispanic
loop.initial_size = 400
loop.steps = 2000
loop.n_runs = 1
loop.seed = 1
loop.explain = true
output = out/propublica-fig3
)"},
      {"propublica-fig4", "Initial-pool persistence on ProPublica, 150 pools x 1500 queries",
       R"(experiment = persistence
dataset.kind = csv
dataset.manifest = propublica/propublica.manifest
model.kind = logistic_regression
regions.kind = group
regions.levels = African-American,Caucasian,Hispanic
loop.initial_size = 400
loop.steps = 1500
loop.seed = 1
loop.explain = false
persistence.n_pools = 150
output = out/propublica-fig4
)"},
      {"propublica-fig4-desk", "Desk-scale persistence study, 30 pools x 500 queries",
       R"(experiment = persistence
dataset.kind = csv
dataset.manifest = propublica/propublica.manifest
model.kind = logistic_regression
regions.kind = group
regions.levels = African-American,Caucasian,Hispanic
loop.initial_size = 400
loop.steps = 500
loop.seed = 1
loop.explain = false
persistence.n_pools = 30
output = out/propublica-fig4-desk
)"},
      {"batch-fig5", "Batch strategies on the high-dimensional surrogate, B = 20",
       R"(experiment = batch
dataset.kind = surrogate
dataset.seed = 1
dataset.rows = 2000
dataset.features = 100
dataset.informative = 10
model.kind = adaboost_stumps
model.n_stumps = 200
explainer.k = 6
regions.kind = none
loop.initial_size = 50
loop.n_runs = 10
loop.seed = 1
batch.size = 20
batch.rounds = 15
batch.test_fraction = 0.25
batch.strategies = random,q_best,kmeans_center,kmeans_uncertain
batch.features = f000,f001,f002
output = out/batch-fig5
)"},
      {"clusters-fig7", "Explanation clusters on ProPublica (K = 2) tracked over 500 queries",
       R"(experiment = clusters
dataset.kind = csv
dataset.manifest = propublica/propublica.manifest
model.kind = logistic_regression
explainer.k = 2
regions.kind = none
loop.initial_size = 400
loop.steps = 500
loop.seed = 1
loop.explain = false
cluster.k = auto
cluster.k_min = 2
cluster.k_max = 60
cluster.threshold = 0.005
cluster.patience = 5
cluster.label_mode = top_m
cluster.top_m = 2
output = out/clusters-fig7
)"},
      {"clusters-fig8", "Explanation clusters on the surrogate (K = 10) with the 2% label cutoff",
       R"(experiment = clusters
dataset.kind = surrogate
dataset.seed = 1
dataset.rows = 2000
dataset.features = 100
dataset.informative = 10
model.kind = logistic_regression
explainer.k = 10
regions.kind = none
loop.initial_size = 100
loop.steps = 300
loop.seed = 1
loop.explain = false
cluster.k = auto
cluster.k_min = 2
cluster.k_max = 60
cluster.threshold = 0.005
cluster.patience = 5
cluster.label_mode = contribution_cutoff
cluster.cutoff = 0.02
output = out/clusters-fig8
)"},
  };
  return all;
}

inline ExperimentConfig preset_config(std::string_view name) {
  for (const auto& p : presets()) {
    if (name == p.name) return ExperimentConfig::parse(p.text);
  }
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + std::string(p.name);
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Dataset resolution

inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("XAL_DATA_DIR"); env && *env) return env;
  return XAL_DEFAULT_DATA_DIR;
}

inline TabularDataset load_experiment_dataset(const DatasetSpec& spec, LoadReport* report = nullptr) {
  switch (spec.kind) {
    case DatasetKind::toy:
      return generate_toy(spec.seed, spec.n_per_gaussian);
    case DatasetKind::surrogate:
      return generate_surrogate_highdim(spec.seed, spec.rows, spec.features, spec.informative);
    case DatasetKind::csv: {
      std::filesystem::path p(spec.manifest);
      if (p.is_relative()) p = data_dir() / p;
      if (!std::filesystem::exists(p)) {
        throw Error("dataset manifest not found: " + p.string() +
                    " (set XAL_DATA_DIR to the data directory)");
      }
      return DatasetManifest::load(p.string()).load_dataset(report);
    }
  }
  throw Error("unknown dataset kind");
}

inline RegionSpec experiment_regions(const ExperimentConfig& cfg, const TabularDataset& data) {
  if (cfg.region_kind == "none") return RegionSpec();
  return RegionSpec::from_group(data, cfg.region_levels);
}

/// Initial-pool candidates: rows whose group level is listed (all rows if none).
inline std::vector<std::size_t> initial_candidates(const ExperimentConfig& cfg,
                                                   const TabularDataset& data) {
  std::vector<std::size_t> out;
  if (cfg.initial_groups.empty()) return out;
  if (!data.group()) throw ConfigError("loop.initial_groups needs a dataset with a group attribute");
  const auto& g = *data.group();
  std::vector<bool> keep(g.levels.size(), false);
  for (const auto& name : cfg.initial_groups) {
    const int li = g.level_index(name);
    if (li < 0) throw ConfigError("loop.initial_groups names unknown level '" + name + "'");
    keep[li] = true;
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (keep[g.codes[i]]) out.push_back(i);
  }
  return out;
}

inline std::uint64_t run_seed(std::uint64_t base, std::size_t run) {
  return mix_seed(base, 0x5EED + run);
}

}  // namespace xal
