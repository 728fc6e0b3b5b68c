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

// Uncertainty clusters. Each explanation becomes a sparse vector over the
// constraint vocabulary (every feature x bin of one discretizer) holding its
// signed weights; k-means groups points that share sources of uncertainty.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xal/common.hpp"
#include "xal/discretizer.hpp"
#include "xal/explain.hpp"
#include "xal/kmeans.hpp"
#include "xal/learner.hpp"

namespace xal {

class ConstraintVocabulary {
 public:
  ConstraintVocabulary() = default;
  explicit ConstraintVocabulary(const Discretizer& disc) {
    for (std::size_t j = 0; j < disc.num_features(); ++j) {
      offsets_.push_back(constraints_.size());
      for (std::size_t b = 0; b < disc.bin_count(j); ++b) {
        constraints_.push_back(disc.constraint_for(j, b));
      }
    }
  }

  std::size_t size() const { return constraints_.size(); }
  const BinConstraint& at(std::size_t dim) const { return constraints_.at(dim); }

  /// Dimension of `c`. Throws when `c` comes from a different discretizer.
  std::size_t index(const BinConstraint& c) const {
    if (c.feature < offsets_.size()) {
      const std::size_t end =
          c.feature + 1 < offsets_.size() ? offsets_[c.feature + 1] : constraints_.size();
      const std::size_t dim = offsets_[c.feature] + c.bin;
      if (dim < end && constraints_[dim] == c) return dim;
    }
    throw Error("constraint '" + c.to_string() + "' is not in the vocabulary");
  }

 private:
  std::vector<BinConstraint> constraints_;
  std::vector<std::size_t> offsets_;
};

inline SparseVector encode_explanation(const Explanation& e, const ConstraintVocabulary& vocab) {
  SparseVector v;
  for (const auto& wc : e.constraints) {
    const std::size_t dim = vocab.index(wc.constraint);
    if (wc.weight != 0.0) v.entries.emplace_back(static_cast<std::uint32_t>(dim), wc.weight);
  }
  std::sort(v.entries.begin(), v.entries.end());
  for (std::size_t i = 1; i < v.entries.size(); ++i) {
    if (v.entries[i].first == v.entries[i - 1].first) throw Error("explanation repeats a constraint");
  }
  return v;
}

inline std::vector<SparseVector> encode_explanations(std::span<const Explanation> explanations,
                                                     const ConstraintVocabulary& vocab) {
  std::vector<SparseVector> out;
  out.reserve(explanations.size());
  for (const auto& e : explanations) out.push_back(encode_explanation(e, vocab));
  return out;
}

/// Constraint strings of the nonzero dimensions, in dimension order.
inline std::vector<std::string> decode(const SparseVector& v, const ConstraintVocabulary& vocab) {
  std::vector<std::string> out;
  for (const auto& [d, w] : v.entries) {
    if (w != 0.0) out.push_back(vocab.at(d).to_string());
  }
  return out;
}

/// Dimension of largest |value| (lowest on ties); -1 for a zero vector.
inline long dominant_dimension(const SparseVector& v) {
  long best = -1;
  double best_abs = 0.0;
  for (const auto& [d, w] : v.entries) {
    const double a = std::abs(w);
    if (a > best_abs) {  // entries are sorted, so ties keep the lowest dim
      best_abs = a;
      best = d;
    }
  }
  return best;
}

inline long dominant_dimension(std::span<const double> centroid) {
  long best = -1;
  double best_abs = 0.0;
  for (std::size_t d = 0; d < centroid.size(); ++d) {
    if (std::abs(centroid[d]) > best_abs) {
      best_abs = std::abs(centroid[d]);
      best = static_cast<long>(d);
    }
  }
  return best;
}

/// The m largest-|value| nonzero dimensions, largest first (lowest dim on ties).
inline std::vector<std::size_t> top_dimensions(std::span<const double> centroid, std::size_t m) {
  std::vector<std::size_t> dims;
  for (std::size_t d = 0; d < centroid.size(); ++d) {
    if (centroid[d] != 0.0) dims.push_back(d);
  }
  std::stable_sort(dims.begin(), dims.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(centroid[a]) > std::abs(centroid[b]);
  });
  if (dims.size() > m) dims.resize(m);
  return dims;
}

/// Fraction of points whose dominant dimension equals their centroid's.
inline double argmax_agreement(std::span<const SparseVector> points, const KMeansResult& m) {
  if (points.empty()) return 0.0;
  std::vector<long> cdom(m.k);
  for (std::size_t c = 0; c < m.k; ++c) cdom[c] = dominant_dimension(m.centroid(c));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (dominant_dimension(points[i]) == cdom[m.assignment[i]]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(points.size());
}

/// Fraction of points sharing at least one nonzero dimension with the top-m
/// dimensions of their centroid. Zero vectors count as sharing nothing.
inline double overlap_agreement(std::span<const SparseVector> points, const KMeansResult& m,
                                std::size_t top_m) {
  if (points.empty()) return 0.0;
  std::vector<std::vector<std::size_t>> tops(m.k);
  for (std::size_t c = 0; c < m.k; ++c) tops[c] = top_dimensions(m.centroid(c), top_m);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& top = tops[m.assignment[i]];
    const bool shared = std::any_of(points[i].entries.begin(), points[i].entries.end(), [&](auto e) {
      return e.second != 0.0 && std::find(top.begin(), top.end(), e.first) != top.end();
    });
    if (shared) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(points.size());
}

struct ChooseKOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 60;
  double threshold = 0.005;
  // Consecutive values of k allowed to miss the threshold against the best
  // agreement so far before the search stops. 1 stops at the first miss.
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  KMeansOptions kmeans;
};

struct ChooseKResult {
  std::size_t k = 1;
  std::vector<std::size_t> ks;  // evaluated values of k, ascending
  std::vector<double> agreement;
  KMeansResult model;  // fit at the chosen k
};

inline std::size_t count_distinct(std::span<const SparseVector> points) {
  std::vector<SparseVector> v(points.begin(), points.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.entries < b.entries; });
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

inline std::uint64_t k_seed(std::uint64_t base, std::size_t k) { return mix_seed(base, 0xC100 + k); }

/// Increases k until `patience` successive values fail to raise the best
/// argmax agreement by at least the threshold; returns the smallest k that
/// attained that best.
inline ChooseKResult choose_k(std::span<const SparseVector> points, std::size_t dim,
                              const ChooseKOptions& opt) {
  if (opt.k_min < 1 || opt.k_max < opt.k_min) throw ConfigError("invalid k range");
  if (!(opt.threshold > 0.0)) throw ConfigError("k improvement threshold must be > 0");
  if (opt.patience < 1) throw ConfigError("k search patience must be >= 1");
  const std::size_t k_hi = std::min(opt.k_max, count_distinct(points));
  if (k_hi < opt.k_min) throw Error("choose_k: fewer distinct encodings than k_min");
  ChooseKResult res;
  auto fit = [&](std::size_t k) { return kmeans(points, dim, k, k_seed(opt.seed, k), opt.kmeans); };
  KMeansResult best = fit(opt.k_min);
  double best_agreement = argmax_agreement(points, best);
  res.ks.push_back(opt.k_min);
  res.agreement.push_back(best_agreement);
  res.k = opt.k_min;
  std::size_t misses = 0;
  for (std::size_t k = opt.k_min + 1; k <= k_hi && misses < opt.patience; ++k) {
    KMeansResult next = fit(k);
    const double a = argmax_agreement(points, next);
    res.ks.push_back(k);
    res.agreement.push_back(a);
    if (a - best_agreement >= opt.threshold) {
      best = std::move(next);
      best_agreement = a;
      res.k = k;
      misses = 0;
    } else {
      ++misses;
    }
  }
  res.model = std::move(best);
  return res;
}

enum class LabelMode { top_m, contribution_cutoff };

struct LabelOptions {
  LabelMode mode = LabelMode::top_m;
  std::size_t top_m = 2;
  double cutoff = 0.02;
};

inline constexpr const char* kManySources = "many sources";

/// Constraint dimensions describing a centroid; empty means "many sources".
inline std::vector<std::size_t> label_dimensions(std::span<const double> centroid,
                                                 const LabelOptions& opt) {
  if (opt.mode == LabelMode::top_m) return top_dimensions(centroid, opt.top_m);
  double mean = 0.0;
  std::size_t nz = 0;
  for (double v : centroid) {
    if (v != 0.0) {
      mean += v;
      ++nz;
    }
  }
  std::vector<std::size_t> out;
  if (nz == 0) return out;
  mean /= static_cast<double>(nz);
  for (std::size_t d = 0; d < centroid.size(); ++d) {
    if (centroid[d] != 0.0 && std::abs(centroid[d] - mean) >= opt.cutoff) out.push_back(d);
  }
  return out;
}

inline std::vector<std::string> label_cluster(std::span<const double> centroid,
                                              const ConstraintVocabulary& vocab,
                                              const LabelOptions& opt) {
  std::vector<std::string> out;
  for (std::size_t d : label_dimensions(centroid, opt)) out.push_back(vocab.at(d).to_string());
  if (out.empty()) out.push_back(kManySources);
  return out;
}

struct ClusterModel {
  KMeansResult kmeans;
  std::vector<std::vector<std::string>> labels;
  std::vector<std::size_t> sizes;
  double agreement = 0.0;
  double overlap = 0.0;
  std::vector<std::size_t> ks;          // choose_k trace
  std::vector<double> agreement_curve;  // choose_k trace

  std::size_t k() const { return kmeans.k; }
  const std::vector<std::size_t>& assignment() const { return kmeans.assignment; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < k(); ++c) out.push_back("cluster_" + std::to_string(c));
    return out;
  }

  RegionSpec regions() const {
    std::vector<int> a(kmeans.assignment.begin(), kmeans.assignment.end());
    return RegionSpec::from_assignment(names(), std::move(a));
  }
};

inline ClusterModel describe_clusters(KMeansResult km, std::span<const SparseVector> points,
                                      const ConstraintVocabulary& vocab,
                                      const LabelOptions& labels, std::size_t overlap_top_m) {
  ClusterModel cm;
  cm.agreement = argmax_agreement(points, km);
  cm.overlap = overlap_agreement(points, km, overlap_top_m);
  cm.sizes.assign(km.k, 0);
  for (std::size_t a : km.assignment) ++cm.sizes[a];
  for (std::size_t c = 0; c < km.k; ++c) cm.labels.push_back(label_cluster(km.centroid(c), vocab, labels));
  cm.kmeans = std::move(km);
  return cm;
}

inline nlohmann::json cluster_report(const ClusterModel& cm, const ConstraintVocabulary& vocab,
                                     std::size_t top_m) {
  auto clusters = nlohmann::json::array();
  for (std::size_t c = 0; c < cm.k(); ++c) {
    const auto cen = cm.kmeans.centroid(c);
    auto top = nlohmann::json::array();
    for (std::size_t d : top_dimensions(cen, top_m)) {
      top.push_back({{"constraint", vocab.at(d).to_string()}, {"weight", cen[d]}});
    }
    std::string label;
    for (std::size_t i = 0; i < cm.labels[c].size(); ++i) label += (i ? "; " : "") + cm.labels[c][i];
    clusters.push_back({{"id", c}, {"size", cm.sizes[c]}, {"label", label}, {"top_constraints", top}});
  }
  nlohmann::json j{{"k", cm.k()},
                   {"agreement", cm.agreement},
                   {"overlap", cm.overlap},
                   {"clusters", clusters}};
  if (!cm.ks.empty()) {
    auto curve = nlohmann::json::array();
    for (std::size_t i = 0; i < cm.ks.size(); ++i) {
      curve.push_back({{"k", cm.ks[i]}, {"agreement", cm.agreement_curve[i]}});
    }
    j["k_search"] = curve;
  }
  return j;
}

struct ClusterSpec {
  ChooseKOptions choose;
  std::optional<std::size_t> fixed_k;  // skip the search
  LabelOptions labels;
  std::size_t warmup_steps = 0;  // queries before the clustering epoch
};

struct ClusterEpoch {
  ConstraintVocabulary vocabulary;
  std::vector<Explanation> explanations;  // one per dataset row
  std::vector<SparseVector> encodings;
  ClusterModel model;
};

/// Explains every dataset row under the learner's current model and
/// clusters the encoded explanations.
inline ClusterEpoch cluster_explanations(const Learner& learner, const ClusterSpec& spec,
                                         std::size_t threads = 0) {
  ClusterEpoch ep;
  ep.vocabulary = ConstraintVocabulary(learner.explain_context().discretizer);
  const std::size_t n = learner.data().size();
  ep.explanations = run_indexed<Explanation>(n, [&](std::size_t i) { return learner.explain(i); },
                                             threads);
  ep.encodings = encode_explanations(ep.explanations, ep.vocabulary);
  const std::size_t top_m = learner.config().explainer.num_features;
  KMeansResult km;
  std::vector<std::size_t> ks;
  std::vector<double> curve;
  if (spec.fixed_k) {
    km = kmeans(ep.encodings, ep.vocabulary.size(), *spec.fixed_k, k_seed(spec.choose.seed, *spec.fixed_k),
                spec.choose.kmeans);
  } else {
    auto ck = choose_k(ep.encodings, ep.vocabulary.size(), spec.choose);
    km = std::move(ck.model);
    ks = std::move(ck.ks);
    curve = std::move(ck.agreement);
  }
  ep.model = describe_clusters(std::move(km), ep.encodings, ep.vocabulary, spec.labels, top_m);
  ep.model.ks = std::move(ks);
  ep.model.agreement_curve = std::move(curve);
  return ep;
}

/// Active learning with the frozen cluster assignment as the tracked regions.
inline RunResult track_clusters(const TabularDataset& data, const ClusterModel& cm,
                                const RunSpec& spec, const LearnerConfig& cfg) {
  if (cm.assignment().size() != data.size()) {
    throw Error("cluster assignment does not cover the dataset");
  }
  return run_experiment(data, cm.regions(), spec, cfg);
}

}  // namespace xal
