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

// Interpretable batch selection. A batch is filled from the uncertainty
// region of the most uncertain pool point; when that region runs out, the
// most uncertain point outside every region used so far seeds the next
// sub-batch. Each sub-batch carries one shared explanation.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xal/common.hpp"
#include "xal/dataset.hpp"
#include "xal/explain.hpp"
#include "xal/kmeans.hpp"
#include "xal/learner.hpp"

namespace xal {

enum class BatchStrategy { random, q_best, kmeans_center, kmeans_uncertain };

inline const char* to_string(BatchStrategy s) {
  switch (s) {
    case BatchStrategy::random:
      return "random";
    case BatchStrategy::q_best:
      return "q_best";
    case BatchStrategy::kmeans_center:
      return "kmeans_center";
    case BatchStrategy::kmeans_uncertain:
      return "kmeans_uncertain";
  }
  return "?";
}

inline BatchStrategy parse_batch_strategy(std::string_view s) {
  for (auto k : {BatchStrategy::random, BatchStrategy::q_best, BatchStrategy::kmeans_center,
                 BatchStrategy::kmeans_uncertain}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown batch strategy '" + std::string(s) + "'");
}

struct BatchRequest {
  std::size_t batch_size = 50;
  BatchStrategy strategy = BatchStrategy::kmeans_uncertain;
  std::vector<std::string> interpretable_features;
};

/// Clustering coordinates: standardized continuous values, one-hot categoricals.
inline std::vector<SparseVector> batch_coordinates(const TabularDataset& data,
                                                   std::span<const std::size_t> rows,
                                                   const PoolStats& stats, std::size_t* dim) {
  const auto& schema = data.schema();
  std::vector<std::size_t> offset(schema.size());
  std::size_t total = 0;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    offset[j] = total;
    total += schema[j].kind == FeatureKind::categorical ? schema[j].categories.size() : 1;
  }
  std::vector<SparseVector> out;
  out.reserve(rows.size());
  for (std::size_t i : rows) {
    SparseVector v;
    const auto r = data.row(i);
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto o = static_cast<std::uint32_t>(offset[j]);
      if (schema[j].kind == FeatureKind::categorical) {
        v.entries.emplace_back(o + static_cast<std::uint32_t>(r[j]), 1.0);
      } else if (stats.varies(j)) {
        const double z = (r[j] - stats.mean[j]) / stats.stddev[j];
        if (z != 0.0) v.entries.emplace_back(o, z);
      }
    }
    out.push_back(std::move(v));
  }
  if (dim) *dim = total;
  return out;
}

namespace detail {

/// Rows ordered by (certainty, index).
inline std::vector<std::size_t> by_certainty(std::span<const std::size_t> rows,
                                             std::span<const double> certainties) {
  std::vector<std::size_t> out(rows.begin(), rows.end());
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    if (certainties[a] != certainties[b]) return certainties[a] < certainties[b];
    return a < b;
  });
  return out;
}

}  // namespace detail

/// Picks `request.batch_size` rows among `members`. `certainties` is indexed
/// by dataset row.
inline std::vector<std::size_t> select_batch_in_region(const TabularDataset& data,
                                                       std::span<const std::size_t> members,
                                                       std::span<const double> certainties,
                                                       const PoolStats& stats,
                                                       std::size_t batch_size,
                                                       BatchStrategy strategy, std::uint64_t seed) {
  if (members.empty()) throw Error("select_batch_in_region: region has no members");
  if (batch_size < 1) throw Error("select_batch_in_region: batch size must be >= 1");
  if (batch_size > members.size()) {
    throw Error("select_batch_in_region: batch size exceeds region size");
  }
  const auto ranked = detail::by_certainty(members, certainties);
  switch (strategy) {
    case BatchStrategy::random: {
      Rng rng(seed);
      return rng.sample(std::vector<std::size_t>(members.begin(), members.end()), batch_size);
    }
    case BatchStrategy::q_best:
      return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(batch_size)};
    case BatchStrategy::kmeans_center:
    case BatchStrategy::kmeans_uncertain:
      break;
  }

  std::size_t dim = 0;
  const auto points = batch_coordinates(data, members, stats, &dim);
  const KMeansResult km = kmeans(points, dim, batch_size, seed);
  const std::size_t none = members.size();
  std::vector<std::size_t> pick(batch_size, none);  // position in members
  std::vector<double> best(batch_size, std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < members.size(); ++p) {
    const std::size_t c = km.assignment[p];
    double score;
    if (strategy == BatchStrategy::kmeans_center) {
      const auto cen = km.centroid(c);
      score = detail::sq_distance(points[p], points[p].squared_norm(), cen,
                                  detail::dense_sq_norm(cen));
    } else {
      score = certainties[members[p]];
    }
    if (pick[c] == none || score < best[c] ||
        (score == best[c] && members[p] < members[pick[c]])) {
      best[c] = score;
      pick[c] = p;
    }
  }
  std::vector<std::size_t> out;
  std::set<std::size_t> taken;
  for (std::size_t c = 0; c < batch_size; ++c) {
    if (pick[c] != none && taken.insert(members[pick[c]]).second) out.push_back(members[pick[c]]);
  }
  // Empty clusters: refill from the most uncertain unpicked members.
  for (std::size_t i : ranked) {
    if (out.size() >= batch_size) break;
    if (taken.insert(i).second) out.push_back(i);
  }
  return out;
}

struct SubBatch {
  Explanation explanation;  // of the seed point
  std::vector<std::size_t> members;
  std::size_t region_size = 0;  // eligible members of the region
};

struct InterpretableBatch {
  std::vector<std::size_t> members;
  std::vector<SubBatch> regions;
  bool exhausted = false;  // pool ran out before the batch was full
};

/// Greedy region-by-region batch assembly. `explain(i)` returns the
/// explanation of pool row i; `eligible` is the candidate pool.
template <typename ExplainFn>
InterpretableBatch compose_batch(const TabularDataset& data, std::span<const std::size_t> eligible,
                                 std::span<const double> certainties, const PoolStats& stats,
                                 const BatchRequest& request, std::uint64_t seed,
                                 ExplainFn&& explain) {
  if (request.batch_size < 1) throw ConfigError("batch size must be >= 1");
  InterpretableBatch batch;
  std::vector<std::size_t> candidates(eligible.begin(), eligible.end());
  std::size_t part = 0;
  while (batch.members.size() < request.batch_size && !candidates.empty()) {
    std::size_t seed_row = candidates.front();
    for (std::size_t i : candidates) {
      if (certainties[i] < certainties[seed_row] ||
          (certainties[i] == certainties[seed_row] && i < seed_row)) {
        seed_row = i;
      }
    }
    SubBatch sub;
    sub.explanation = explain(seed_row);
    const UncertaintyRegion region = sub.explanation.region();
    auto members = region_members(region, data, candidates);
    if (members.empty()) throw Error("explanation region does not contain its query");
    sub.region_size = members.size();
    const std::size_t need = request.batch_size - batch.members.size();
    if (members.size() <= need) {
      sub.members = members;
    } else {
      sub.members = select_batch_in_region(data, members, certainties, stats, need,
                                           request.strategy, mix_seed(seed, part));
    }
    for (std::size_t i : sub.members) {
      if (!region.contains(data.row(i))) throw Error("batch member outside its region");
      batch.members.push_back(i);
    }
    // Later regions draw only from points outside every region used so far.
    std::erase_if(candidates, [&](std::size_t i) { return region.contains(data.row(i)); });
    batch.regions.push_back(std::move(sub));
    ++part;
  }
  batch.exhausted = batch.members.size() < request.batch_size;
  return batch;
}

/// compose_batch against a learner's current model, pool and skip set.
inline InterpretableBatch compose_batch(const Learner& learner, const BatchRequest& request,
                                        std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i : learner.state().pool) {
    if (!learner.skipped().count(i)) eligible.push_back(i);
  }
  return compose_batch(learner.data(), eligible, learner.certainties(),
                       learner.explain_context().stats, request, seed,
                       [&](std::size_t i) { return learner.explain(i); });
}

struct FeatureVariation {
  std::string feature;
  bool categorical = false;
  std::vector<std::string> values;  // distinct categories, in category order
  double min = 0.0, max = 0.0;

  std::string to_string() const {
    if (categorical) {
      std::string s = feature + ": {";
      for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + values[i];
      return s + "}";
    }
    if (min == max) return feature + ": " + format_number(min);
    return feature + ": " + format_number(min) + " to " + format_number(max);
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"feature", feature}};
    if (categorical) {
      j["values"] = values;
    } else {
      j["min"] = min;
      j["max"] = max;
    }
    return j;
  }
};

inline std::vector<FeatureVariation> feature_variation(const TabularDataset& data,
                                                       std::span<const std::size_t> rows,
                                                       const std::vector<std::string>& features) {
  std::vector<FeatureVariation> out;
  if (rows.empty()) return out;
  for (const auto& name : features) {
    const std::size_t j = data.feature_index(name);
    const auto& f = data.feature(j);
    FeatureVariation v;
    v.feature = f.display_hint.value_or(f.name);
    if (f.kind == FeatureKind::categorical) {
      v.categorical = true;
      std::vector<bool> seen(f.categories.size(), false);
      for (std::size_t i : rows) seen[static_cast<std::size_t>(data.at(i, j))] = true;
      for (std::size_t c = 0; c < seen.size(); ++c) {
        if (seen[c]) v.values.push_back(f.categories[c]);
      }
    } else {
      v.min = v.max = data.at(rows[0], j);
      for (std::size_t i : rows) {
        v.min = std::min(v.min, data.at(i, j));
        v.max = std::max(v.max, data.at(i, j));
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// Text summary: the shared constraints of each region, then how each
/// interpretable feature varies across that region's members.
inline std::string render_batch_explanation(const InterpretableBatch& batch,
                                            const TabularDataset& data,
                                            const std::vector<std::string>& features) {
  if (batch.members.empty()) throw Error("render_batch_explanation: empty batch");
  std::ostringstream os;
  os << "Batch of " << batch.members.size() << " queries from " << batch.regions.size()
     << (batch.regions.size() == 1 ? " uncertainty region\n" : " uncertainty regions\n");
  for (std::size_t r = 0; r < batch.regions.size(); ++r) {
    const auto& sub = batch.regions[r];
    os << "Region " << r + 1 << " (" << sub.members.size() << " of " << sub.region_size
       << " members)\n";
    for (const auto& wc : sub.explanation.constraints) {
      os << "  " << wc.constraint.to_string() << ", weight " << format_number(wc.weight) << "\n";
    }
    for (const auto& v : feature_variation(data, sub.members, features)) {
      os << "  varies " << v.to_string() << "\n";
    }
  }
  return os.str();
}

inline nlohmann::json batch_to_json(const InterpretableBatch& batch, const TabularDataset& data,
                                    const std::vector<std::string>& features) {
  auto regions = nlohmann::json::array();
  for (const auto& sub : batch.regions) {
    auto constraints = nlohmann::json::array();
    for (const auto& wc : sub.explanation.constraints) {
      constraints.push_back(wc.constraint.to_string());
    }
    auto variation = nlohmann::json::array();
    for (const auto& v : feature_variation(data, sub.members, features)) variation.push_back(v.to_json());
    regions.push_back({{"constraints", constraints},
                       {"members", sub.members},
                       {"region_size", sub.region_size},
                       {"explanation", sub.explanation.to_json()},
                       {"variation", variation}});
  }
  auto summary = nlohmann::json::array();
  for (const auto& v : feature_variation(data, batch.members, features)) summary.push_back(v.to_json());
  return {{"members", batch.members},
          {"regions", regions},
          {"variation_summary", summary},
          {"exhausted", batch.exhausted}};
}

// ---------------------------------------------------------------------------
// Strategy evaluation

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  void add(int predicted, int truth) {
    if (predicted == 1) {
      truth == 1 ? ++tp : ++fp;
    } else {
      truth == 1 ? ++fn : ++tn;
    }
  }

  /// Matthews correlation; nullopt when any marginal is empty.
  std::optional<double> mcc() const {
    const double TP = tp, FP = fp, FN = fn, TN = tn;
    const double den = (TP + FP) * (TP + FN) * (TN + FP) * (TN + FN);
    if (den == 0.0) return std::nullopt;
    return (TP * TN - FP * FN) / std::sqrt(den);
  }
};

template <ProbabilisticModel M>
ConfusionMatrix confusion(const M& model, const TabularDataset& test) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < test.size(); ++i) {
    cm.add(model.predict_proba(test.row(i)) >= 0.5 ? 1 : 0, test.label(i));
  }
  return cm;
}

struct StrategyStudySpec {
  std::vector<BatchStrategy> strategies{BatchStrategy::random, BatchStrategy::q_best,
                                        BatchStrategy::kmeans_center,
                                        BatchStrategy::kmeans_uncertain};
  std::size_t batch_size = 50;
  std::size_t rounds = 15;
  std::size_t initial_size = 50;
  std::size_t n_runs = 10;
  double test_fraction = 0.25;
  std::uint64_t seed = 1;
};

struct CurvePoint {
  BatchStrategy strategy;
  std::size_t run = 0;
  std::size_t round = 0;
  std::size_t labeled_count = 0;
  std::optional<double> mcc;
  ConfusionMatrix confusion;
};

struct StrategyCurves {
  std::vector<BatchStrategy> strategies;
  std::size_t rounds = 0;
  std::size_t n_runs = 0;
  std::vector<CurvePoint> points;  // strategy-major, then run, then round

  /// Mean MCC over runs where it is defined.
  std::optional<double> mean_mcc(BatchStrategy s, std::size_t round) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : points) {
      if (p.strategy == s && p.round == round && p.mcc) {
        sum += *p.mcc;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

/// Deterministic train/test split: shuffled with the study seed.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_rows(
    std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x7E57));
  rng.shuffle(idx);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {train, test};
}

/// Learning curves per strategy. Every strategy sees the same split, the same
/// initial pool and the same seeds within a run; batches are labelled
/// atomically with one refit per round.
inline StrategyCurves evaluate_strategies(const TabularDataset& data, const StrategyStudySpec& spec,
                                          const LearnerConfig& cfg, std::size_t threads = 0) {
  if (spec.strategies.empty()) throw ConfigError("no batch strategies listed");
  const auto [train_rows, test_rows] = split_rows(data.size(), spec.test_fraction, spec.seed);
  const TabularDataset train = data.subset(train_rows);
  const TabularDataset test = data.subset(test_rows);
  if (spec.initial_size + spec.batch_size * spec.rounds > train.size()) {
    throw ConfigError("training pool too small for initial pool plus all batches");
  }
  StrategyCurves out;
  out.strategies = spec.strategies;
  out.rounds = spec.rounds;
  out.n_runs = spec.n_runs;
  const std::size_t jobs = spec.strategies.size() * spec.n_runs;
  const auto results = run_indexed<std::vector<CurvePoint>>(
      jobs,
      [&](std::size_t job) {
        const BatchStrategy strategy = spec.strategies[job / spec.n_runs];
        const std::size_t run = job % spec.n_runs;
        const std::uint64_t run_seed = mix_seed(spec.seed, 0xBA7C + run);
        RunSpec rs;
        rs.initial_size = spec.initial_size;
        rs.seed = run_seed;
        LearnerConfig lc = cfg;
        lc.explain_queries = false;
        Learner learner(train, RegionSpec(), lc, sample_initial_pool(train.size(), rs), run_seed);
        BatchRequest req;
        req.batch_size = spec.batch_size;
        req.strategy = strategy;
        std::vector<CurvePoint> curve;
        auto record = [&](std::size_t round) {
          CurvePoint p{strategy, run, round, learner.state().labeled.size(), std::nullopt, {}};
          p.confusion = confusion(learner.state().model, test);
          p.mcc = p.confusion.mcc();
          curve.push_back(p);
        };
        record(0);
        for (std::size_t r = 1; r <= spec.rounds; ++r) {
          const auto batch = compose_batch(learner, req, mix_seed(run_seed, r));
          std::vector<std::pair<std::size_t, int>> items;
          for (std::size_t i : batch.members) items.emplace_back(i, train.label(i));
          if (items.empty()) break;
          learner.apply_labels(items);
          record(r);
        }
        return curve;
      },
      threads);
  for (const auto& c : results) out.points.insert(out.points.end(), c.begin(), c.end());
  return out;
}

}  // namespace xal
