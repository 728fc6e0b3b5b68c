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

#include <cmath>

#include "gtest/gtest.h"
#include "xal/cluster.hpp"

namespace xal {
namespace {

Discretizer two_feature_disc() {
  return Discretizer({FeatureSchema::continuous("a"), FeatureSchema::categorical("s", {"u", "v", "w"})},
                     {{0.0, 1.0}, {}});
}

Explanation make_explanation(const Discretizer& d,
                             std::vector<std::tuple<std::size_t, std::size_t, double>> parts) {
  Explanation e;
  for (auto [f, b, w] : parts) e.constraints.push_back({d.constraint_for(f, b), w});
  return e;
}

SparseVector dense(std::vector<double> v) { return SparseVector::from_dense(v); }

TEST(ConstraintVocabulary, OneDimensionPerBin) {
  const auto disc = two_feature_disc();
  const ConstraintVocabulary vocab(disc);
  ASSERT_EQ(vocab.size(), 6u);
  for (std::size_t d = 0; d < vocab.size(); ++d) EXPECT_EQ(vocab.index(vocab.at(d)), d);
  EXPECT_EQ(vocab.at(4).to_string(), "s = v");
  const Discretizer other({FeatureSchema::continuous("a")}, {{0.5}});
  EXPECT_THROW(vocab.index(other.constraint_for(0, 0)), Error);
}

TEST(EncodeExplanation, RoundTripsThroughDecode) {
  const auto disc = two_feature_disc();
  const ConstraintVocabulary vocab(disc);
  const auto e = make_explanation(disc, {{1, 2, -0.3}, {0, 1, 0.2}, {0, 2, 0.0}});
  const auto v = encode_explanation(e, vocab);
  ASSERT_EQ(v.entries.size(), 2u);
  EXPECT_EQ(v.entries[0], (std::pair<std::uint32_t, double>{1, 0.2}));
  EXPECT_EQ(v.entries[1], (std::pair<std::uint32_t, double>{5, -0.3}));
  EXPECT_EQ(decode(v, vocab), (std::vector<std::string>{"0 < a <= 1", "s = w"}));
  EXPECT_THROW(encode_explanation(make_explanation(disc, {{0, 1, 0.2}, {0, 1, 0.1}}), vocab), Error);
}

TEST(DominantDimension, LargestMagnitudeLowestOnTies) {
  EXPECT_EQ(dominant_dimension(dense({0, -0.5, 0.5, 0.1})), 1);
  EXPECT_EQ(dominant_dimension(SparseVector{}), -1);
  const std::vector<double> c{0.1, -0.4, 0.4};
  EXPECT_EQ(dominant_dimension(std::span<const double>(c)), 1);
  EXPECT_EQ(top_dimensions(c, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(top_dimensions(std::vector<double>{0, 0.2}, 3), (std::vector<std::size_t>{1}));
}

KMeansResult fixed_model(std::vector<std::vector<double>> centroids, std::vector<std::size_t> assignment) {
  KMeansResult m;
  m.k = centroids.size();
  m.dim = centroids[0].size();
  for (const auto& c : centroids) m.centroids.insert(m.centroids.end(), c.begin(), c.end());
  m.assignment = std::move(assignment);
  return m;
}

TEST(Agreement, HandCountedFixture) {
  const std::vector<SparseVector> pts{dense({0.9, 0.1, 0}), dense({0, 0.5, 0}), dense({0, 0.1, 0.8}),
                                      dense({0, 0, 0})};
  const auto m = fixed_model({{0.6, 0.3, 0}, {0, 0.2, 0.7}}, {0, 0, 1, 1});
  // Dominant dims: points 0, 1, 2, -1; centroids 0, 2.
  EXPECT_DOUBLE_EQ(argmax_agreement(pts, m), 2.0 / 4);
  // Top-2 of centroid 0 is {0, 1}, of centroid 1 is {2, 1}; the zero point shares nothing.
  EXPECT_DOUBLE_EQ(overlap_agreement(pts, m, 2), 3.0 / 4);
  EXPECT_DOUBLE_EQ(overlap_agreement(pts, m, 1), 2.0 / 4);
}

// Three explanation sources, each a pair of constraints with its own weights.
std::vector<SparseVector> three_sources(std::size_t per_source) {
  std::vector<SparseVector> pts;
  Rng rng(2);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < per_source; ++i) {
      std::vector<double> v(6, 0.0);
      v[2 * s] = -0.5 - 0.05 * rng.uniform();
      v[2 * s + 1] = 0.1 + 0.05 * rng.uniform();
      pts.push_back(dense(v));
    }
  }
  return pts;
}

TEST(Agreement, SeparatedSourcesGiveFullOverlap) {
  const auto pts = three_sources(20);
  const auto m = kmeans(pts, 6, 3, k_seed(1, 3));
  EXPECT_EQ(overlap_agreement(pts, m, 2), 1.0);
  EXPECT_EQ(argmax_agreement(pts, m), 1.0);
}

TEST(ChooseK, StopsAtTheSmallestBestK) {
  // Four distinct encodings in two groups with different dominant dimensions.
  std::vector<SparseVector> pts;
  for (int r = 0; r < 5; ++r) {
    pts.push_back(dense({5, 0.1, 0}));
    pts.push_back(dense({5, 0, 0.1}));
    pts.push_back(dense({0, 0.1, -5}));
    pts.push_back(dense({0.1, 0, -5}));
  }
  EXPECT_EQ(count_distinct(pts), 4u);
  ChooseKOptions opt;
  const auto patient = choose_k(pts, 3, opt);
  EXPECT_EQ(patient.k, 2u);
  EXPECT_EQ(patient.ks, (std::vector<std::size_t>{2, 3, 4}));  // capped by distinct encodings
  EXPECT_EQ(patient.agreement[0], 1.0);
  opt.patience = 1;
  const auto literal = choose_k(pts, 3, opt);
  EXPECT_EQ(literal.ks, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(literal.k, 2u);
}

TEST(ChooseK, FindsTheSourceCount) {
  const auto pts = three_sources(15);
  ChooseKOptions opt;
  opt.k_max = 10;
  const auto r = choose_k(pts, 6, opt);
  EXPECT_EQ(r.k, 3u);
  EXPECT_EQ(r.model.k, 3u);
  EXPECT_EQ(argmax_agreement(pts, r.model), 1.0);
}

TEST(ChooseK, ValidatesOptions) {
  const std::vector<SparseVector> pts{dense({1, 0}), dense({0, 1}), dense({1, 1}), dense({1, 1})};
  ChooseKOptions opt;
  opt.threshold = 0.0;
  EXPECT_THROW(choose_k(pts, 2, opt), ConfigError);
  opt = {};
  opt.k_min = 5;
  opt.k_max = 4;
  EXPECT_THROW(choose_k(pts, 2, opt), ConfigError);
  opt = {};
  opt.k_min = 4;
  EXPECT_THROW(choose_k(pts, 2, opt), Error);  // only 3 distinct encodings
}

TEST(LabelCluster, TopMAndCutoffModes) {
  const ConstraintVocabulary vocab(two_feature_disc());
  const std::vector<double> c{0, -0.4, 0, 0.1, 0, 0.3};
  EXPECT_EQ(label_cluster(c, vocab, {LabelMode::top_m, 2, 0}),
            (std::vector<std::string>{"0 < a <= 1", "s = w"}));
  // Cutoff 0 keeps every nonzero dimension, in dimension order.
  EXPECT_EQ(label_cluster(c, vocab, {LabelMode::contribution_cutoff, 2, 0.0}).size(), 3u);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(label_cluster(c, vocab, {LabelMode::contribution_cutoff, 2, inf}),
            (std::vector<std::string>{kManySources}));
  EXPECT_EQ(label_cluster(std::vector<double>(6, 0.0), vocab, {}), (std::vector<std::string>{kManySources}));
  // Mean of nonzero values is 0; only |v| >= 0.25 survives a 0.25 cutoff.
  EXPECT_EQ(label_dimensions(c, {LabelMode::contribution_cutoff, 2, 0.25}),
            (std::vector<std::size_t>{1, 5}));
}

TEST(ClusterExplanations, EpochOverToyLearner) {
  const auto data = generate_toy(3, 20);
  LearnerConfig cfg;
  cfg.explainer.num_samples = 150;
  RunSpec rs{16, {}, 0, 9};
  Learner learner(data, RegionSpec::from_group(data), cfg, sample_initial_pool(data.size(), rs), 9);
  ClusterSpec spec;
  spec.fixed_k = 3;
  const auto ep = cluster_explanations(learner, spec, 2);
  EXPECT_EQ(ep.explanations.size(), data.size());
  EXPECT_EQ(ep.encodings.size(), data.size());
  EXPECT_EQ(ep.model.k(), 3u);
  std::size_t total = 0;
  for (auto s : ep.model.sizes) total += s;
  EXPECT_EQ(total, data.size());
  const auto report = cluster_report(ep.model, ep.vocabulary, 2);
  EXPECT_EQ(report["clusters"].size(), 3u);
  EXPECT_FALSE(report.contains("k_search"));

  const auto run = track_clusters(data, ep.model, RunSpec{10, {}, 3, 4}, cfg);
  EXPECT_EQ(run.history.regions, ep.model.names());
  EXPECT_EQ(run.history.rounds(), 4u);
  EXPECT_EQ(ep.model.regions().universe().size(), data.size());
}

}  // namespace
}  // namespace xal
