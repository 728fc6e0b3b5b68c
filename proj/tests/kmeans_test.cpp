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
#include "xal/kmeans.hpp"

namespace xal {
namespace {

std::vector<SparseVector> points_from(const std::vector<std::vector<double>>& rows) {
  std::vector<SparseVector> out;
  for (const auto& r : rows) out.push_back(SparseVector::from_dense(r));
  return out;
}

// Minimum within-cluster sum of squares over every assignment of n points to
// k labels (empty clusters allowed, which never lowers the optimum).
double exhaustive_optimum(const std::vector<std::vector<double>>& rows, std::size_t k) {
  const std::size_t n = rows.size(), dim = rows[0].size();
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != c) continue;
        ++cnt;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += rows[i][d];
      }
      if (!cnt) continue;
      for (auto& v : mean) v /= static_cast<double>(cnt);
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != c) continue;
        for (std::size_t d = 0; d < dim; ++d) total += (rows[i][d] - mean[d]) * (rows[i][d] - mean[d]);
      }
    }
    best = std::min(best, total);
    std::size_t p = 0;
    while (p < n && ++label[p] == k) label[p++] = 0;
    if (p == n) break;
  }
  return best;
}

std::vector<std::vector<double>> random_rows(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& r : rows) {
    for (auto& v : r) v = rng.uniform() < 0.4 ? 0.0 : rng.normal();
  }
  return rows;
}

TEST(SparseVector, FromDenseDropsZeros) {
  const std::vector<double> x{0, 2, 0, -1};
  const auto s = SparseVector::from_dense(x);
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries[1].first, 3u);
  EXPECT_EQ(s.squared_norm(), 5.0);
}

TEST(KMeans, SeparatedBlobsReachTheExhaustiveOptimum) {
  const std::vector<std::vector<double>> rows{{0, 0}, {0.1, 0}, {0, 0.2},   {5, 5},
                                              {5.1, 5}, {5, 4.9}, {-4, 6}, {-4.2, 6.1}};
  const auto pts = points_from(rows);
  const auto m = kmeans(pts, 2, 3, 1);
  EXPECT_NEAR(m.objective(), exhaustive_optimum(rows, 3), 1e-12);
  EXPECT_EQ(m.assignment[0], m.assignment[2]);
  EXPECT_NE(m.assignment[0], m.assignment[3]);
  EXPECT_NE(m.assignment[3], m.assignment[6]);
}

TEST(KMeans, NeverBeatsTheExhaustiveOptimumAndRestartsHelp) {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rows = random_rows(rng, 7, 3);
    const auto pts = points_from(rows);
    const double opt = exhaustive_optimum(rows, 3);
    const auto one = kmeans(pts, 3, 3, trial);
    ASSERT_GE(one.objective(), opt - 1e-9);
    KMeansOptions many;
    many.n_init = 10;
    const auto best = kmeans(pts, 3, 3, trial, many);
    ASSERT_LE(best.objective(), kmeans(pts, 3, 3, mix_seed(trial, 0)).objective() + 1e-12);
    ASSERT_GE(best.objective(), opt - 1e-9);
  }
}

TEST(KMeans, ObjectiveIsMonotoneAndPointsSitWithNearestCentroid) {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rows = random_rows(rng, 200, 6);
    const auto pts = points_from(rows);
    const auto m = kmeans(pts, 6, 5, trial);
    const auto& h = m.objective_history;
    for (std::size_t i = 1; i < h.size(); ++i) ASSERT_LE(h[i], h[i - 1] + 1e-9);
    for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_EQ(m.assignment[i], nearest_centroid(pts[i], m));
    ASSERT_NEAR(kmeans_objective(pts, m), m.objective(), 1e-9 * std::max(1.0, m.objective()));
  }
}

TEST(KMeans, SingleClusterCentroidIsTheMean) {
  const std::vector<std::vector<double>> rows{{1, 0}, {3, 2}, {2, 7}};
  const auto m = kmeans(points_from(rows), 2, 1, 5);
  EXPECT_NEAR(m.centroid(0)[0], 2.0, 1e-15);
  EXPECT_NEAR(m.centroid(0)[1], 3.0, 1e-15);
}

TEST(KMeans, IdenticalPointsAndInvalidK) {
  const auto pts = points_from({{1, 1}, {1, 1}, {1, 1}});
  const auto m = kmeans(pts, 2, 2, 0);
  EXPECT_EQ(m.objective(), 0.0);
  EXPECT_THROW(kmeans(pts, 2, 4, 0), Error);
  EXPECT_THROW(kmeans(pts, 2, 0, 0), Error);
}

TEST(KMeans, DeterministicUnderSeed) {
  Rng rng(3);
  const auto pts = points_from(random_rows(rng, 100, 4));
  const auto a = kmeans(pts, 4, 4, 12), b = kmeans(pts, 4, 4, 12);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.centroids, b.centroids);
}

}  // namespace
}  // namespace xal
