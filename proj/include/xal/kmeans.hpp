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

// Lloyd's k-means with k-means++ seeding over sparse points and dense
// centroids. Shared by in-region batch strategies and explanation clustering.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "xal/common.hpp"

namespace xal {

/// Sparse vector: (dimension, value) pairs, dimensions strictly increasing.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double squared_norm() const {
    double s = 0.0;
    for (const auto& [d, v] : entries) s += v * v;
    return s;
  }

  static SparseVector from_dense(std::span<const double> x) {
    SparseVector s;
    for (std::size_t d = 0; d < x.size(); ++d) {
      if (x[d] != 0.0) s.entries.emplace_back(static_cast<std::uint32_t>(d), x[d]);
    }
    return s;
  }

  bool operator==(const SparseVector&) const = default;
};

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;  // relative objective change
  std::size_t n_init = 1;   // seeded restarts; the lowest final objective wins
};

struct KMeansResult {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k x dim, row-major
  std::vector<std::size_t> assignment;
  std::vector<double> objective_history;  // one value per assignment step
  std::size_t iterations = 0;

  std::span<const double> centroid(std::size_t c) const {
    return {centroids.data() + c * dim, dim};
  }
  double objective() const { return objective_history.empty() ? 0.0 : objective_history.back(); }
};

namespace detail {

inline double sq_distance(const SparseVector& x, double x_norm, std::span<const double> c,
                          double c_norm) {
  double dot = 0.0;
  for (const auto& [d, v] : x.entries) dot += v * c[d];
  return std::max(0.0, x_norm - 2.0 * dot + c_norm);
}

inline double dense_sq_norm(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return s;
}

}  // namespace detail

/// Within-cluster sum of squared deviations for a given assignment.
inline double kmeans_objective(std::span<const SparseVector> points, const KMeansResult& m) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = m.centroid(m.assignment[i]);
    total += detail::sq_distance(points[i], points[i].squared_norm(), c, detail::dense_sq_norm(c));
  }
  return total;
}

namespace detail {

inline KMeansResult kmeans_once(std::span<const SparseVector> points, std::size_t dim,
                                std::size_t k, std::uint64_t seed, const KMeansOptions& opt) {
  const std::size_t n = points.size();
  if (k < 1) throw Error("kmeans: k must be >= 1");
  if (k > n) throw Error("kmeans: k exceeds the number of points");
  KMeansResult m;
  m.k = k;
  m.dim = dim;
  m.centroids.assign(k * dim, 0.0);
  m.assignment.assign(n, 0);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = points[i].squared_norm();

  auto set_centroid = [&](std::size_t c, const SparseVector& p) {
    std::fill(m.centroids.begin() + c * dim, m.centroids.begin() + (c + 1) * dim, 0.0);
    for (const auto& [d, v] : p.entries) m.centroids[c * dim + d] = v;
  };

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.index(n);
  set_centroid(0, points[first]);
  for (std::size_t c = 1; c < k; ++c) {
    const auto prev = m.centroid(c - 1);
    const double prev_norm = detail::dense_sq_norm(prev);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], detail::sq_distance(points[i], norms[i], prev, prev_norm));
      total += closest[i];
    }
    std::size_t pick = 0;
    if (total <= 0.0) {
      // Every point coincides with a chosen centre; take the first unused index.
      pick = std::min(c, n - 1);
    } else {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        u -= closest[i];
        if (u < 0) {
          pick = i;
          break;
        }
      }
    }
    set_centroid(c, points[pick]);
  }

  std::vector<double> cnorm(k);
  std::vector<double> dist(n);
  std::vector<std::size_t> sizes(k);
  auto assign_all = [&]() {
    for (std::size_t c = 0; c < k; ++c) cnorm[c] = detail::dense_sq_norm(m.centroid(c));
    double obj = 0.0;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = detail::sq_distance(points[i], norms[i], m.centroid(c), cnorm[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      m.assignment[i] = best;
      dist[i] = best_d;
      ++sizes[best];
      obj += best_d;
    }
    return obj;
  };

  double prev_obj = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> previous(n, k);
  bool stable = false;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    double obj = assign_all();
    // Empty cluster: reseed at the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[m.assignment[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far_d < 0) break;
      --sizes[m.assignment[far]];
      obj -= dist[far];
      m.assignment[far] = c;
      dist[far] = 0.0;
      sizes[c] = 1;
    }
    m.objective_history.push_back(obj);
    ++m.iterations;
    stable = m.assignment == previous;
    previous = m.assignment;
    if (stable) break;

    // Update step.
    std::fill(m.centroids.begin(), m.centroids.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = m.assignment[i];
      for (const auto& [d, v] : points[i].entries) m.centroids[c * dim + d] += v;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      const double inv = 1.0 / static_cast<double>(sizes[c]);
      for (std::size_t d = 0; d < dim; ++d) m.centroids[c * dim + d] *= inv;
    }
    if (obj == 0.0) break;
    if (std::isfinite(prev_obj) &&
        std::abs(prev_obj - obj) <= opt.tolerance * std::max(prev_obj, 1e-300)) {
      break;
    }
    prev_obj = obj;
  }
  // Centroids moved after the last assignment: one more pass so every point
  // sits with its nearest centroid.
  if (!stable) m.objective_history.push_back(assign_all());
  return m;
}

}  // namespace detail

inline KMeansResult kmeans(std::span<const SparseVector> points, std::size_t dim, std::size_t k,
                           std::uint64_t seed, const KMeansOptions& opt = {}) {
  if (opt.n_init <= 1) return detail::kmeans_once(points, dim, k, seed, opt);
  KMeansResult best;
  for (std::size_t r = 0; r < opt.n_init; ++r) {
    KMeansResult m = detail::kmeans_once(points, dim, k, mix_seed(seed, r), opt);
    if (r == 0 || m.objective() < best.objective()) best = std::move(m);
  }
  return best;
}

/// Index of the centroid nearest to p (lowest index on ties).
inline std::size_t nearest_centroid(const SparseVector& p, const KMeansResult& m) {
  const double pn = p.squared_norm();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < m.k; ++c) {
    const auto cen = m.centroid(c);
    const double d = detail::sq_distance(p, pn, cen, detail::dense_sq_norm(cen));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace xal
