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

// Local explanations of a model's *certainty* at a query point.
//
// Pipeline: perturb the query -> score each sample with certainty(model, .)
// -> weight samples by proximity -> binarise samples as "same bin as the
// query" per feature -> greedy forward selection of K indicator columns ->
// weighted ridge on the selected columns. The query's own bins on the chosen
// features, with the ridge weights, form the explanation; their conjunction is
// the uncertainty region.

#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "xal/common.hpp"
#include "xal/dataset.hpp"
#include "xal/discretizer.hpp"
#include "xal/models.hpp"

namespace xal {

struct ExplainerConfig {
  std::size_t num_samples = 1000;
  std::optional<double> kernel_width;  // default 0.75 * sqrt(d)
  std::size_t num_features = 2;        // K
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_features < 1) throw ConfigError("explainer: K must be >= 1");
    if (num_samples < num_features + 1) throw ConfigError("explainer: N must be >= K + 1");
    if (kernel_width && !(*kernel_width > 0)) throw ConfigError("explainer: kernel width must be > 0");
    if (!(ridge_lambda > 0)) throw ConfigError("explainer: ridge lambda must be > 0");
  }
};

/// Pool-wide statistics driving perturbation and the kernel distance.
struct PoolStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std, continuous features
  std::vector<std::vector<double>> category_cdf;  // categorical features

  static PoolStats from(const TabularDataset& data) {
    PoolStats s;
    const std::size_t d = data.num_features(), n = data.size();
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    s.category_cdf.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const auto& f = data.feature(j);
      if (f.is_categorical()) {
        std::vector<double> counts(f.categories.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(data.at(i, j))] += 1;
        double acc = 0.0;
        for (double& c : counts) {
          acc += c / static_cast<double>(n);
          c = acc;
        }
        s.category_cdf[j] = std::move(counts);
        continue;
      }
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += data.at(i, j);
      m /= static_cast<double>(n);
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += (data.at(i, j) - m) * (data.at(i, j) - m);
      s.mean[j] = m;
      s.stddev[j] = std::sqrt(v / static_cast<double>(n));
    }
    return s;
  }

  /// A categorical feature with a single observed category has no variation.
  bool varies(std::size_t j) const {
    if (!category_cdf[j].empty()) {
      for (double c : category_cdf[j]) {
        if (c > 0 && c < 1) return true;
      }
      return false;
    }
    return stddev[j] > 0;
  }
};

/// N perturbed rows (row-major, d columns). Row 0 is the query itself.
struct PerturbedSamples {
  std::size_t num_features = 0;
  std::vector<double> values;

  std::size_t size() const { return num_features ? values.size() / num_features : 0; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * num_features, num_features};
  }
};

inline PerturbedSamples perturb(std::span<const double> query, const PoolStats& stats,
                                const std::vector<FeatureSchema>& schema, std::size_t n,
                                std::uint64_t seed) {
  const std::size_t d = schema.size();
  if (query.size() != d) throw Error("perturb: query length mismatch");
  PerturbedSamples out{d, std::vector<double>(n * d)};
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double* r = out.values.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      if (i == 0 || !stats.varies(j)) {
        r[j] = query[j];
      } else if (schema[j].is_categorical()) {
        const auto& cdf = stats.category_cdf[j];
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        r[j] = static_cast<double>(std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1));
      } else {
        r[j] = query[j] + stats.stddev[j] * rng.normal();
      }
    }
  }
  return out;
}

inline double default_kernel_width(std::size_t num_features) {
  return 0.75 * std::sqrt(static_cast<double>(num_features));
}

/// exp(-dist^2 / width^2); dist is Euclidean over standardised continuous
/// features plus 1 per differing categorical.
inline std::vector<double> kernel_weights(std::span<const double> query,
                                          const PerturbedSamples& samples, const PoolStats& stats,
                                          const std::vector<FeatureSchema>& schema, double width) {
  if (samples.size() == 0) throw Error("kernel_weights: no samples");
  std::vector<double> w(samples.size());
  const double w2 = width * width;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto z = samples.row(i);
    double d2 = 0.0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema[j].is_categorical()) {
        d2 += z[j] != query[j] ? 1.0 : 0.0;
      } else if (stats.stddev[j] > 0) {
        const double t = (z[j] - query[j]) / stats.stddev[j];
        d2 += t * t;
      }
    }
    w[i] = std::isinf(w2) ? 1.0 : std::exp(-d2 / w2);
  }
  return w;
}

struct FeatureSelection {
  std::vector<std::size_t> columns;  // in selection order
  std::vector<double> residuals;     // weighted SSE after each addition
  bool short_explanation = false;    // fewer than K usable columns
};

/// Greedy forward selection: each step adds the column whose inclusion
/// minimises the weighted residual sum of squares of a ridge fit (intercept
/// unpenalised). Ties go to the lowest column index. Columns constant over the
/// positively weighted samples are never selected.
///
/// Z is N x m, row-major.
inline FeatureSelection select_features_greedy(std::span<const double> Z, std::size_t m,
                                               std::span<const double> y,
                                               std::span<const double> w, std::size_t K,
                                               double lambda) {
  const std::size_t n = y.size();
  if (Z.size() != n * m || w.size() != n) throw Error("select_features_greedy: shape mismatch");
  double wsum = 0.0;
  for (double wi : w) wsum += wi;
  if (wsum <= 0) throw Error("select_features_greedy: all sample weights are zero");

  double ymean = 0.0;
  for (std::size_t i = 0; i < n; ++i) ymean += w[i] * y[i];
  ymean /= wsum;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) syy += w[i] * (y[i] - ymean) * (y[i] - ymean);

  std::vector<double> mean(m, 0.0), gdiag(m, 0.0), b(m, 0.0);
  std::vector<bool> usable(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    double first = 0.0;
    bool seen = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] <= 0) continue;
      const double v = Z[i * m + j];
      if (!seen) {
        first = v;
        seen = true;
      } else if (v != first) {
        usable[j] = true;
      }
      mean[j] += w[i] * v;
    }
    mean[j] /= wsum;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = Z[i * m + j] - mean[j];
      gdiag[j] += w[i] * c * c;
      b[j] += w[i] * c * (y[i] - ymean);
    }
  }

  FeatureSelection sel;
  std::vector<std::vector<double>> cross;  // cross[s][j] for selected s
  std::vector<bool> taken(m, false);
  const std::size_t usable_count =
      static_cast<std::size_t>(std::count(usable.begin(), usable.end(), true));
  const std::size_t target = std::min(K, usable_count);
  sel.short_explanation = usable_count < K;
  const double tie_tol = 1e-12 * std::max(1.0, syy);

  while (sel.columns.size() < target) {
    const std::size_t k = sel.columns.size() + 1;
    double best_sse = std::numeric_limits<double>::infinity();
    std::size_t best = m;
    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd rhs(k);
    for (std::size_t j = 0; j < m; ++j) {
      if (!usable[j] || taken[j]) continue;
      for (std::size_t a = 0; a + 1 < k; ++a) {
        for (std::size_t c = 0; c + 1 < k; ++c) A(a, c) = cross[a][sel.columns[c]];
        A(a, a) += lambda;
        A(a, k - 1) = A(k - 1, a) = cross[a][j];
        rhs[a] = b[sel.columns[a]];
      }
      A(k - 1, k - 1) = gdiag[j] + lambda;
      rhs[k - 1] = b[j];
      const Eigen::VectorXd beta = A.ldlt().solve(rhs);
      const double sse = syy - beta.dot(rhs) - lambda * beta.squaredNorm();
      if (sse < best_sse - tie_tol) {
        best_sse = sse;
        best = j;
      }
    }
    if (best == m) break;
    taken[best] = true;
    sel.columns.push_back(best);
    sel.residuals.push_back(std::max(0.0, best_sse));
    std::vector<double> row(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      if (!usable[j]) continue;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += w[i] * (Z[i * m + best] - mean[best]) * (Z[i * m + j] - mean[j]);
      }
      row[j] = acc;
    }
    cross.push_back(std::move(row));
  }
  return sel;
}

struct WeightedConstraint {
  BinConstraint constraint;
  double weight = 0.0;
};

/// Conjunction of bin constraints.
struct UncertaintyRegion {
  std::vector<BinConstraint> constraints;

  bool contains(std::span<const double> row) const {
    for (const auto& c : constraints) {
      if (!c.satisfied_by(row)) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t k = 0; k < constraints.size(); ++k) {
      if (k) out += " AND ";
      out += constraints[k].to_string();
    }
    return out.empty() ? "(everything)" : out;
  }
};

struct Explanation {
  std::size_t query_index = 0;
  std::vector<WeightedConstraint> constraints;
  double intercept = 0.0;
  double certainty = 0.0;  // certainty(model, query)
  double local_r2 = 0.0;
  bool short_explanation = false;
  bool degenerate = false;  // model certainty constant around the query

  UncertaintyRegion region() const {
    UncertaintyRegion r;
    for (const auto& c : constraints) r.constraints.push_back(c.constraint);
    return r;
  }

  /// "priors_count > 20, weight 0.3; sex = Male, weight -0.04"
  std::string to_string() const {
    std::string out;
    for (std::size_t k = 0; k < constraints.size(); ++k) {
      if (k) out += "; ";
      out += constraints[k].constraint.to_string() + ", weight " +
             format_number(constraints[k].weight);
    }
    return out;
  }

  nlohmann::json to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& c : constraints) {
      arr.push_back({{"text", c.constraint.to_string()},
                     {"feature", c.constraint.feature_name},
                     {"bin", c.constraint.bin},
                     {"weight", c.weight}});
    }
    nlohmann::json j{{"query_index", query_index},
                     {"certainty", certainty},
                     {"constraints", arr},
                     {"intercept", intercept},
                     {"r2", local_r2}};
    if (short_explanation) j["short"] = true;
    if (degenerate) j["degenerate"] = true;
    return j;
  }
};

/// Per-round explanation inputs: the pool, its statistics, and the
/// discretizer fitted on the labelled set for the current model.
struct ExplainContext {
  const TabularDataset* pool = nullptr;
  PoolStats stats;
  Discretizer discretizer;

  ExplainContext(const TabularDataset& data, Discretizer disc)
      : pool(&data), stats(PoolStats::from(data)), discretizer(std::move(disc)) {}
  ExplainContext(const TabularDataset& data, PoolStats s, Discretizer disc)
      : pool(&data), stats(std::move(s)), discretizer(std::move(disc)) {}
};

/// Explains certainty(model, .) around an arbitrary row. Each call draws from
/// its own stream seeded by (config.seed, stream_id).
template <ProbabilisticModel M>
Explanation explain_row(const M& model, std::span<const double> query, std::size_t stream_id,
                        const ExplainContext& ctx, const ExplainerConfig& cfg) {
  const auto& schema = ctx.pool->schema();
  const std::size_t d = schema.size();
  const auto samples = perturb(query, ctx.stats, schema, cfg.num_samples,
                               mix_seed(cfg.seed, stream_id));
  const std::size_t n = samples.size();
  std::vector<double> y(n);
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = certainty(model, samples.row(i));
    ymin = std::min(ymin, y[i]);
    ymax = std::max(ymax, y[i]);
  }
  const double width = cfg.kernel_width.value_or(default_kernel_width(d));
  const auto w = kernel_weights(query, samples, ctx.stats, schema, width);

  const auto query_bins = ctx.discretizer.discretize(query);
  std::vector<double> Z(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = samples.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      Z[i * d + j] = ctx.discretizer.bin(j, r[j]) == query_bins[j] ? 1.0 : 0.0;
    }
  }
  const auto sel = select_features_greedy(Z, d, y, w, cfg.num_features, cfg.ridge_lambda);

  Explanation e;
  e.query_index = stream_id;
  e.certainty = y[0];
  e.short_explanation = sel.short_explanation;
  e.degenerate = ymax - ymin <= 1e-15;
  const std::size_t k = sel.columns.size();
  Eigen::MatrixXd Xs(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) Xs(i, c) = Z[i * d + sel.columns[c]];
  }
  if (k > 0) {
    const RidgeModel local = fit_ridge_weighted(Xs, y, w, cfg.ridge_lambda);
    e.intercept = local.intercept;
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t j = sel.columns[c];
      e.constraints.push_back({ctx.discretizer.constraint_for(j, query_bins[j]),
                               e.degenerate ? 0.0 : local.coef[c]});
    }
    double wsum = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wsum += w[i];
      ym += w[i] * y[i];
    }
    ym /= wsum;
    double sse = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double pred = local.intercept;
      for (std::size_t c = 0; c < k; ++c) pred += local.coef[c] * Xs(i, c);
      sse += w[i] * (y[i] - pred) * (y[i] - pred);
      syy += w[i] * (y[i] - ym) * (y[i] - ym);
    }
    e.local_r2 = syy > 0 ? 1.0 - sse / syy : 0.0;
  } else {
    double wsum = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wsum += w[i];
      ym += w[i] * y[i];
    }
    e.intercept = ym / wsum;
  }
  return e;
}

/// Explanation of the model's certainty at pool row `query_index`.
template <ProbabilisticModel M>
Explanation explain_uncertainty(const M& model, std::size_t query_index, const ExplainContext& ctx,
                                const ExplainerConfig& cfg) {
  if (query_index >= ctx.pool->size()) throw Error("explain_uncertainty: query index out of range");
  return explain_row(model, ctx.pool->row(query_index), query_index, ctx, cfg);
}

/// Pool indices satisfying every constraint of `region`.
inline std::vector<std::size_t> region_members(const UncertaintyRegion& region,
                                               const TabularDataset& pool) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (region.contains(pool.row(i))) out.push_back(i);
  }
  return out;
}

/// Members of `region` among `candidates`, in candidate order.
inline std::vector<std::size_t> region_members(const UncertaintyRegion& region,
                                               const TabularDataset& pool,
                                               std::span<const std::size_t> candidates) {
  std::vector<std::size_t> out;
  for (std::size_t i : candidates) {
    if (region.contains(pool.row(i))) out.push_back(i);
  }
  return out;
}

}  // namespace xal
