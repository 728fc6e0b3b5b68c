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

// Pool-based active learning with uncertainty sampling, explained queries,
// and per-region uncertainty-bias tracking.

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <thread>
#include <vector>

#include "xal/bias.hpp"
#include "xal/common.hpp"
#include "xal/dataset.hpp"
#include "xal/discretizer.hpp"
#include "xal/explain.hpp"
#include "xal/models.hpp"

namespace xal {

struct ModelSpec {
  ModelKind kind = ModelKind::logistic_regression;
  LogisticConfig logistic;
  std::size_t n_stumps = 200;

  Classifier fit(const TabularDataset& data, std::span<const std::size_t> rows,
                 std::span<const int> labels) const {
    if (kind == ModelKind::logistic_regression) return fit_logistic(data, rows, labels, logistic);
    return fit_adaboost_stumps(data, rows, labels, n_stumps);
  }
};

struct LearnerConfig {
  ModelSpec model;
  ExplainerConfig explainer;
  std::size_t max_bins = 8;
  bool explain_queries = true;
};

struct LearnerState {
  std::vector<std::size_t> labeled;  // sorted
  std::vector<std::size_t> pool;     // sorted, unlabeled
  std::vector<int> given_labels;     // per dataset row, -1 while unlabeled
  Classifier model;
  std::size_t round = 0;
  BiasSeries history;
  std::uint64_t seed = 0;
};

struct PendingQuery {
  std::size_t round = 0;
  std::size_t query_index = 0;
  double certainty = 0.0;
  int region = -1;
  std::optional<Explanation> explanation;
};

struct QueryRecord {
  std::size_t round = 0;  // round at which the query was selected
  std::size_t query_index = 0;
  double certainty = 0.0;
  int label = 0;
  int region = -1;
  std::optional<Explanation> explanation;
  std::vector<std::optional<double>> biases;  // after the refit
};

struct OracleAnswer {
  enum class Kind { label, skip, abort };
  Kind kind = Kind::label;
  int label = 0;

  static OracleAnswer of(int l) { return {Kind::label, l}; }
  static OracleAnswer skip() { return {Kind::skip, 0}; }
  static OracleAnswer abort() { return {Kind::abort, 0}; }
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleAnswer answer(const PendingQuery& query) = 0;
};

/// Reads the held ground-truth label.
class SimulatedOracle : public Oracle {
 public:
  explicit SimulatedOracle(const TabularDataset& data) : data_(&data) {}
  OracleAnswer answer(const PendingQuery& q) override {
    return OracleAnswer::of(data_->label(q.query_index));
  }

 private:
  const TabularDataset* data_;
};

/// Owns one active-learning run over a fixed dataset. Single writer: callers
/// must serialise mutating calls.
class Learner {
 public:
  Learner(const TabularDataset& data, RegionSpec regions, LearnerConfig cfg,
          std::vector<std::size_t> initial, std::uint64_t seed)
      : data_(&data), regions_(std::move(regions)), cfg_(std::move(cfg)) {
    cfg_.explainer.validate();
    if (regions_.assignment().size() != data.size() && regions_.size() > 0) {
      throw Error("region assignment must cover every dataset row");
    }
    state_.seed = seed;
    state_.given_labels.assign(data.size(), -1);
    std::sort(initial.begin(), initial.end());
    if (std::adjacent_find(initial.begin(), initial.end()) != initial.end()) {
      throw Error("initial pool has duplicate indices");
    }
    for (std::size_t i : initial) {
      if (i >= data.size()) throw Error("initial index out of range");
      state_.given_labels[i] = data.label(i);
    }
    state_.labeled = initial;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (state_.given_labels[i] < 0) state_.pool.push_back(i);
    }
    state_.history = BiasSeries(regions_.names());
    queried_.assign(regions_.size(), 0);
    refit();
  }

  const LearnerState& state() const { return state_; }
  const TabularDataset& data() const { return *data_; }
  const RegionSpec& regions() const { return regions_; }
  const LearnerConfig& config() const { return cfg_; }
  const std::vector<double>& certainties() const { return certainties_; }
  const CertaintyLabels& labels() const { return U_; }
  const ExplainContext& explain_context() const { return *context_; }
  const std::set<std::size_t>& skipped() const { return skipped_; }

  /// Least certain eligible pool row; ties go to the lowest index.
  std::size_t select_query() const {
    std::optional<std::size_t> best;
    for (std::size_t i : state_.pool) {
      if (skipped_.count(i)) continue;
      if (!best || certainties_[i] < certainties_[*best]) best = i;
    }
    if (!best) {
      throw Error(state_.pool.empty() ? "pool is empty" : "every pool point was skipped this round");
    }
    return *best;
  }

  Explanation explain(std::size_t index) const {
    return explain_uncertainty(state_.model, index, *context_, explainer_config());
  }

  PendingQuery propose() const {
    PendingQuery q;
    q.round = state_.round;
    q.query_index = select_query();
    q.certainty = certainties_[q.query_index];
    q.region = regions_.region_of(q.query_index);
    if (cfg_.explain_queries) q.explanation = explain(q.query_index);
    return q;
  }

  /// Moves `index` to the labelled set, refits, and records the new round.
  QueryRecord apply_label(std::size_t index, int label,
                          std::optional<Explanation> explanation = std::nullopt) {
    QueryRecord rec;
    rec.round = state_.round;
    rec.query_index = index;
    rec.certainty = certainties_.at(index);
    rec.label = label;
    rec.region = regions_.region_of(index);
    rec.explanation = std::move(explanation);
    const std::pair<std::size_t, int> one{index, label};
    apply_labels(std::span(&one, 1));
    rec.biases = latest_biases();
    return rec;
  }

  /// Labels several pool rows at once with a single refit (one round).
  void apply_labels(std::span<const std::pair<std::size_t, int>> items) {
    std::set<std::size_t> seen;
    for (const auto& [i, l] : items) {
      if (i >= data_->size() || state_.given_labels[i] >= 0) {
        throw Error("row " + std::to_string(i) + " is not in the unlabeled pool");
      }
      if (l != 0 && l != 1) throw Error("labels must be 0 or 1");
      if (!seen.insert(i).second) throw Error("duplicate row in label batch");
    }
    for (const auto& [i, l] : items) {
      state_.given_labels[i] = l;
      state_.labeled.insert(std::upper_bound(state_.labeled.begin(), state_.labeled.end(), i), i);
      state_.pool.erase(std::lower_bound(state_.pool.begin(), state_.pool.end(), i));
      if (const int r = regions_.region_of(i); r >= 0) ++queried_[r];
    }
    ++state_.round;
    skipped_.clear();
    refit();
  }

  /// Suppresses `index` until the next refit.
  void skip(std::size_t index) {
    if (!std::binary_search(state_.pool.begin(), state_.pool.end(), index)) {
      throw Error("row " + std::to_string(index) + " is not in the unlabeled pool");
    }
    skipped_.insert(index);
  }

  /// One query: select, explain, ask the oracle. Returns nullopt on skip.
  std::optional<QueryRecord> step(Oracle& oracle) {
    PendingQuery q = propose();
    const OracleAnswer a = oracle.answer(q);
    switch (a.kind) {
      case OracleAnswer::Kind::abort:
        throw Error("oracle aborted; state unchanged");
      case OracleAnswer::Kind::skip:
        skip(q.query_index);
        return std::nullopt;
      case OracleAnswer::Kind::label:
        break;
    }
    return apply_label(q.query_index, a.label, std::move(q.explanation));
  }

  std::vector<std::optional<double>> latest_biases() const {
    std::vector<std::optional<double>> out;
    for (const auto& s : state_.history.bias) out.push_back(s.back());
    return out;
  }

  ExplainerConfig explainer_config() const {
    ExplainerConfig c = cfg_.explainer;
    c.seed = mix_seed(state_.seed, 0xE1) ^ c.seed;
    return c;
  }

 private:
  void refit() {
    std::vector<int> labs;
    labs.reserve(state_.labeled.size());
    for (std::size_t i : state_.labeled) labs.push_back(state_.given_labels[i]);
    state_.model = cfg_.model.fit(*data_, state_.labeled, labs);
    Discretizer disc = fit_discretizer(*data_, state_.labeled, labs, cfg_.max_bins);
    if (!context_) {
      context_.emplace(*data_, std::move(disc));
    } else {
      context_->discretizer = std::move(disc);
    }
    certainties_ = pool_certainties(state_.model, *data_);
    U_ = certainty_labels(certainties_);
    state_.history.append(region_biases(U_, regions_), queried_);
  }

  const TabularDataset* data_;
  RegionSpec regions_;
  LearnerConfig cfg_;
  LearnerState state_;
  std::optional<ExplainContext> context_;
  std::vector<double> certainties_;
  CertaintyLabels U_;
  std::vector<std::size_t> queried_;
  std::set<std::size_t> skipped_;
};

// ---------------------------------------------------------------------------
// Experiments

struct RunSpec {
  std::size_t initial_size = 50;
  std::vector<std::size_t> initial_candidates;  // empty = every row
  std::size_t steps = 200;
  std::uint64_t seed = 1;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<std::size_t> initial;
  BiasSeries history;
  std::vector<QueryRecord> log;
};

/// Uniform initial pool without replacement, derived from the run seed.
inline std::vector<std::size_t> sample_initial_pool(std::size_t n_rows, const RunSpec& spec) {
  std::vector<std::size_t> candidates = spec.initial_candidates;
  if (candidates.empty()) {
    candidates.resize(n_rows);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }
  if (spec.initial_size > candidates.size()) {
    throw ConfigError("initial pool size exceeds the number of candidate rows");
  }
  Rng rng(mix_seed(spec.seed, 0x1A));
  return rng.sample(candidates, spec.initial_size);
}

inline RunResult run_experiment(const TabularDataset& data, const RegionSpec& regions,
                                const RunSpec& spec, const LearnerConfig& cfg) {
  if (spec.initial_size + spec.steps > data.size()) {
    throw ConfigError("initial pool plus steps exceeds the dataset size");
  }
  RunResult res;
  res.seed = spec.seed;
  res.initial = sample_initial_pool(data.size(), spec);
  Learner learner(data, regions, cfg, res.initial, spec.seed);
  SimulatedOracle oracle(data);
  for (std::size_t s = 0; s < spec.steps; ++s) {
    auto rec = learner.step(oracle);
    if (rec) res.log.push_back(std::move(*rec));
  }
  res.history = learner.state().history;
  return res;
}

/// Runs fn(0..n-1) on up to `threads` workers; results are indexed, so the
/// merge order is independent of scheduling.
template <typename T, typename Fn>
std::vector<T> run_indexed(std::size_t n, Fn&& fn, std::size_t threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i] = fn(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            slots[i] = fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct PersistenceSpec {
  std::size_t n_pools = 150;
  std::size_t steps = 1500;
  std::size_t initial_size = 400;
  std::uint64_t base_seed = 1;
};

struct PersistenceResult {
  std::vector<std::string> regions;
  std::vector<std::uint64_t> pool_seeds;
  // [region][pool] -> (initial bias, final bias)
  std::vector<std::vector<std::pair<std::optional<double>, std::optional<double>>>> pairs;
  std::vector<LinearFit> fits;         // final on initial, per region
  std::vector<std::size_t> excluded;   // pairs with an undefined side
};

inline std::uint64_t pool_seed(std::uint64_t base, std::size_t pool) {
  return mix_seed(base, 0x9000 + pool);
}

/// Initial vs final bias per region across many random starting pools.
inline PersistenceResult pool_persistence_study(const TabularDataset& data,
                                                const RegionSpec& regions,
                                                const PersistenceSpec& spec,
                                                const LearnerConfig& cfg,
                                                std::size_t threads = 0) {
  if (spec.initial_size + spec.steps > data.size()) {
    throw ConfigError("dataset too small for initial pool plus steps");
  }
  PersistenceResult res;
  res.regions = regions.names();
  for (std::size_t p = 0; p < spec.n_pools; ++p) res.pool_seeds.push_back(pool_seed(spec.base_seed, p));
  const auto runs = run_indexed<BiasSeries>(
      spec.n_pools,
      [&](std::size_t p) {
        RunSpec rs{spec.initial_size, {}, spec.steps, res.pool_seeds[p]};
        return run_experiment(data, regions, rs, cfg).history;
      },
      threads);
  res.pairs.resize(regions.size());
  for (std::size_t r = 0; r < regions.size(); ++r) {
    std::vector<double> xs, ys;
    std::size_t excluded = 0;
    for (const auto& h : runs) {
      const auto a = h.bias[r].front(), b = h.bias[r].back();
      res.pairs[r].emplace_back(a, b);
      if (a && b) {
        xs.push_back(*a);
        ys.push_back(*b);
      } else {
        ++excluded;
      }
    }
    res.fits.push_back(fit_line(xs, ys));
    res.excluded.push_back(excluded);
  }
  return res;
}

}  // namespace xal
