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
#include "xal/explain.hpp"

namespace xal {
namespace {

// Pr(1) = sigmoid(slope * x[feature]).
struct OneFeatureModel {
  std::size_t feature = 0;
  double slope = 3.0;
  double predict_proba(std::span<const double> row) const { return sigmoid(slope * row[feature]); }
};

struct ConstantModel {
  double predict_proba(std::span<const double>) const { return 0.7; }
};

TabularDataset mixed_pool(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> v;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    v.push_back(rng.normal() * 2.0);
    v.push_back(rng.normal() + 5.0);
    v.push_back(rng.uniform() < 0.3 ? 0.0 : 1.0);
    v.push_back(1.0);  // constant column
    y.push_back(static_cast<int>(rng.index(2)));
  }
  return TabularDataset({FeatureSchema::continuous("a"), FeatureSchema::continuous("b"),
                         FeatureSchema::categorical("s", {"u", "v"}), FeatureSchema::continuous("k")},
                        v, y);
}

TEST(ExplainerConfig, Validation) {
  ExplainerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.num_samples = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.kernel_width = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Perturb, MomentsMatchPoolStatistics) {
  const auto pool = mixed_pool(1, 3000);
  const auto stats = PoolStats::from(pool);
  const std::vector<double> q{0.5, 4.0, 1.0, 1.0};
  const std::size_t n = 40000;
  const auto s = perturb(q, stats, pool.schema(), n, 77);
  ASSERT_EQ(s.size(), n);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(s.row(0)[j], q[j]);
  double m0 = 0, v0 = 0, cat0 = 0;
  for (std::size_t i = 1; i < n; ++i) {
    m0 += s.row(i)[0];
    v0 += (s.row(i)[0] - q[0]) * (s.row(i)[0] - q[0]);
    cat0 += s.row(i)[2] == 0.0;
    ASSERT_EQ(s.row(i)[3], 1.0);
  }
  const double k = static_cast<double>(n - 1);
  // Standard errors: sd/sqrt(n) for the mean, about sd^2*sqrt(2/n) for the variance.
  EXPECT_NEAR(m0 / k, q[0], 4 * stats.stddev[0] / std::sqrt(k));
  EXPECT_NEAR(v0 / k, stats.stddev[0] * stats.stddev[0],
              4 * stats.stddev[0] * stats.stddev[0] * std::sqrt(2 / k));
  const double p0 = stats.category_cdf[2][0];
  EXPECT_NEAR(cat0 / k, p0, 4 * std::sqrt(p0 * (1 - p0) / k));
}

TEST(Perturb, DeterministicPerSeed) {
  const auto pool = mixed_pool(1, 200);
  const auto stats = PoolStats::from(pool);
  const auto a = perturb(pool.row(3), stats, pool.schema(), 50, 5);
  const auto b = perturb(pool.row(3), stats, pool.schema(), 50, 5);
  const auto c = perturb(pool.row(3), stats, pool.schema(), 50, 6);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(KernelWeights, HandComputedDistances) {
  PoolStats stats;
  stats.stddev = {1.0, 2.0, 0.0};
  stats.mean = {0, 0, 0};
  stats.category_cdf = {{}, {}, {0.5, 1.0}};
  const std::vector<FeatureSchema> schema{FeatureSchema::continuous("a"), FeatureSchema::continuous("b"),
                                          FeatureSchema::categorical("s", {"u", "v"})};
  PerturbedSamples s{3, {0, 0, 0, 1, 2, 0, 1, 2, 1}};
  const std::vector<double> q{0, 0, 0};
  const auto w = kernel_weights(q, s, stats, schema, 1.0);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_NEAR(w[1], std::exp(-2.0), 1e-15);  // 1^2 + (2/2)^2
  EXPECT_NEAR(w[2], std::exp(-3.0), 1e-15);  // plus one differing category
  const auto wide = kernel_weights(q, s, stats, schema, 2.0);
  EXPECT_NEAR(wide[2], std::exp(-0.75), 1e-15);
  EXPECT_NEAR(default_kernel_width(16), 3.0, 1e-15);
}

// Weighted SSE of the ridge fit on `cols`, solved as an augmented least-squares
// problem by QR.
double reference_sse(const std::vector<double>& Z, std::size_t m, const std::vector<double>& y,
                     const std::vector<double>& w, const std::vector<std::size_t>& cols,
                     double lambda) {
  const Eigen::Index n = static_cast<Eigen::Index>(y.size()), k = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + k, k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::sqrt(w[i]);
    for (Eigen::Index c = 0; c < k; ++c) A(i, c) = s * Z[i * m + cols[c]];
    A(i, k) = s;
    rhs[i] = s * y[i];
  }
  for (Eigen::Index c = 0; c < k; ++c) A(n + c, c) = std::sqrt(lambda);
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(rhs);
  double sse = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double pred = beta[k];
    for (Eigen::Index c = 0; c < k; ++c) pred += beta[c] * Z[i * m + cols[c]];
    sse += w[i] * (y[i] - pred) * (y[i] - pred);
  }
  return sse;
}

TEST(SelectFeaturesGreedy, MatchesExhaustiveStepSearch) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 40, m = 6, K = 4;
    std::vector<double> Z(n * m), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) Z[i * m + j] = rng.uniform() < 0.5;
      y[i] = 0.6 * Z[i * m + 1] - 0.3 * Z[i * m + 4] + 0.2 * rng.normal();
      w[i] = rng.uniform();
    }
    const double lambda = 0.5;
    const auto sel = select_features_greedy(Z, m, y, w, K, lambda);
    ASSERT_EQ(sel.columns.size(), K);
    std::vector<std::size_t> chosen;
    for (std::size_t step = 0; step < K; ++step) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = m;
      for (std::size_t j = 0; j < m; ++j) {
        if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        auto cols = chosen;
        cols.push_back(j);
        const double sse = reference_sse(Z, m, y, w, cols, lambda);
        if (sse < best - 1e-10) {
          best = sse;
          best_j = j;
        }
      }
      ASSERT_EQ(sel.columns[step], best_j) << "trial " << trial << " step " << step;
      ASSERT_NEAR(sel.residuals[step], best, 1e-9);
      chosen.push_back(best_j);
    }
  }
}

TEST(SelectFeaturesGreedy, SkipsConstantColumns) {
  // Column 1 is constant; column 2 only varies on a zero-weight sample.
  const std::vector<double> Z{1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1};
  const std::vector<double> y{1, 0, 1, 0}, w{1, 1, 1, 0};
  const auto sel = select_features_greedy(Z, 3, y, w, 2, 1.0);
  EXPECT_EQ(sel.columns, (std::vector<std::size_t>{0}));
  EXPECT_TRUE(sel.short_explanation);
  EXPECT_THROW(select_features_greedy(Z, 3, y, std::vector<double>{0, 0, 0, 0}, 2, 1.0), Error);
}

TEST(ExplainRow, NamesTheDrivingFeatureWithNegativeWeight) {
  // Certainty depends on `a` only and is lowest near a = 0; the query sits in
  // the bin around zero, so membership in that bin lowers certainty.
  const auto pool = mixed_pool(2, 2000);
  const Discretizer disc(pool.schema(), {{-1.0, 1.0}, {4.0, 5.0, 6.0}, {}, {}});
  const ExplainContext ctx(pool, disc);
  ExplainerConfig cfg;
  cfg.seed = 3;
  const std::vector<double> q{0.1, 5.5, 1.0, 1.0};
  const auto e = explain_row(OneFeatureModel{}, q, 0, ctx, cfg);
  ASSERT_EQ(e.constraints.size(), 2u);
  EXPECT_EQ(e.constraints[0].constraint.to_string(), "-1 < a <= 1");
  EXPECT_LT(e.constraints[0].weight, 0.0);
  EXPECT_GT(std::abs(e.constraints[0].weight), 10 * std::abs(e.constraints[1].weight));
  EXPECT_NEAR(e.certainty, certainty(sigmoid(0.3)), 1e-15);
  EXPECT_GT(e.local_r2, 0.5);
  EXPECT_FALSE(e.degenerate);
  // The region contains the query itself.
  EXPECT_TRUE(e.region().contains(q));
}

TEST(ExplainRow, ConstantModelIsDegenerate) {
  const auto pool = mixed_pool(2, 300);
  const ExplainContext ctx(pool, Discretizer(pool.schema(), {{0.0}, {5.0}, {}, {}}));
  const auto e = explain_row(ConstantModel{}, pool.row(0), 0, ctx, ExplainerConfig{});
  EXPECT_TRUE(e.degenerate);
  for (const auto& c : e.constraints) EXPECT_EQ(c.weight, 0.0);
}

TEST(ExplainUncertainty, DeterministicAndRangeChecked) {
  const auto pool = mixed_pool(4, 300);
  const ExplainContext ctx(pool, Discretizer(pool.schema(), {{0.0}, {5.0}, {}, {}}));
  ExplainerConfig cfg;
  const auto a = explain_uncertainty(OneFeatureModel{0, 1.0}, 7, ctx, cfg);
  const auto b = explain_uncertainty(OneFeatureModel{0, 1.0}, 7, ctx, cfg);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.query_index, 7u);
  EXPECT_THROW(explain_uncertainty(OneFeatureModel{}, 300, ctx, cfg), Error);
}

TEST(RegionMembers, AgreesWithDirectConstraintCheck) {
  const auto pool = mixed_pool(5, 500);
  const Discretizer disc(pool.schema(), {{0.0}, {5.0}, {}, {}});
  UncertaintyRegion r{{disc.constraint_for(0, 1), disc.constraint_for(2, 0)}};
  EXPECT_EQ(r.to_string(), "a > 0 AND s = u");
  const auto members = region_members(r, pool);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) expected += pool.at(i, 0) > 0 && pool.at(i, 2) == 0;
  EXPECT_EQ(members.size(), expected);
  const std::vector<std::size_t> cand{members.back(), 0, members.front()};
  EXPECT_EQ(region_members(r, pool, cand).front(), members.back());
  EXPECT_EQ(UncertaintyRegion{}.to_string(), "(everything)");
}

}  // namespace
}  // namespace xal
