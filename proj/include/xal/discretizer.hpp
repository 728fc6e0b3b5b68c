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

// Entropy-driven binning of continuous features and the bin constraints used
// to phrase explanations.
//
// Bins are left-open, right-closed: with cuts c_0 < c_1 < ... bin k covers
// (c_{k-1}, c_k], so "a < x <= b" renders exactly the membership test.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "xal/common.hpp"
#include "xal/dataset.hpp"

namespace xal {

enum class ConstraintForm { any, at_most, between, above, equals };

/// One clause of an explanation: a feature restricted to one of its bins.
struct BinConstraint {
  std::size_t feature = 0;
  std::size_t bin = 0;
  ConstraintForm form = ConstraintForm::any;
  double lower = 0.0;  // exclusive bound (between, above)
  double upper = 0.0;  // inclusive bound (at_most, between)
  std::string feature_name;
  std::string category_name;  // equals only

  bool satisfied_by(std::span<const double> row) const {
    const double v = row[feature];
    switch (form) {
      case ConstraintForm::any:
        return true;
      case ConstraintForm::at_most:
        return v <= upper;
      case ConstraintForm::between:
        return lower < v && v <= upper;
      case ConstraintForm::above:
        return v > lower;
      case ConstraintForm::equals:
        return static_cast<std::size_t>(v) == bin;
    }
    return false;
  }

  std::string to_string() const {
    switch (form) {
      case ConstraintForm::any:
        return feature_name + " is any";
      case ConstraintForm::at_most:
        return feature_name + " <= " + format_number(upper);
      case ConstraintForm::between:
        return format_number(lower) + " < " + feature_name + " <= " + format_number(upper);
      case ConstraintForm::above:
        return feature_name + " > " + format_number(lower);
      case ConstraintForm::equals:
        return feature_name + " = " + category_name;
    }
    return {};
  }

  bool operator==(const BinConstraint&) const = default;
};

class Discretizer {
 public:
  Discretizer() = default;
  Discretizer(std::vector<FeatureSchema> schema, std::vector<std::vector<double>> cuts)
      : schema_(std::move(schema)), cuts_(std::move(cuts)) {
    if (cuts_.size() != schema_.size()) throw Error("discretizer: one cut list per feature");
    for (std::size_t j = 0; j < cuts_.size(); ++j) {
      if (schema_[j].is_categorical() && !cuts_[j].empty()) {
        throw Error("discretizer: categorical feature cannot have cuts");
      }
      for (std::size_t k = 1; k < cuts_[j].size(); ++k) {
        if (!(cuts_[j][k - 1] < cuts_[j][k])) throw Error("discretizer: cuts must increase");
      }
    }
  }

  std::size_t num_features() const { return schema_.size(); }
  const std::vector<FeatureSchema>& schema() const { return schema_; }
  const std::vector<double>& cuts(std::size_t feature) const { return cuts_[feature]; }

  std::size_t bin_count(std::size_t feature) const {
    return schema_[feature].is_categorical() ? schema_[feature].categories.size()
                                             : cuts_[feature].size() + 1;
  }

  std::size_t bin(std::size_t feature, double value) const {
    if (schema_[feature].is_categorical()) return static_cast<std::size_t>(value);
    const auto& c = cuts_[feature];
    // Number of cuts strictly below value.
    return static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), value) - c.begin());
  }

  std::vector<std::size_t> discretize(std::span<const double> row) const {
    if (row.size() != schema_.size()) throw Error("discretize: row length mismatch");
    std::vector<std::size_t> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = bin(j, row[j]);
    return out;
  }

  BinConstraint constraint_for(std::size_t feature, std::size_t bin_index) const {
    if (feature >= schema_.size() || bin_index >= bin_count(feature)) {
      throw Error("constraint_for: bin out of range");
    }
    BinConstraint c;
    c.feature = feature;
    c.bin = bin_index;
    c.feature_name = schema_[feature].name;
    if (schema_[feature].is_categorical()) {
      c.form = ConstraintForm::equals;
      c.category_name = schema_[feature].categories[bin_index];
      return c;
    }
    const auto& cuts = cuts_[feature];
    if (cuts.empty()) {
      c.form = ConstraintForm::any;
    } else if (bin_index == 0) {
      c.form = ConstraintForm::at_most;
      c.upper = cuts.front();
    } else if (bin_index == cuts.size()) {
      c.form = ConstraintForm::above;
      c.lower = cuts.back();
    } else {
      c.form = ConstraintForm::between;
      c.lower = cuts[bin_index - 1];
      c.upper = cuts[bin_index];
    }
    return c;
  }

 private:
  std::vector<FeatureSchema> schema_;
  std::vector<std::vector<double>> cuts_;
};

namespace detail {

inline double binary_entropy_mass(double n0, double n1) {
  // n * H(p) in nats; zero for pure or empty sets.
  double h = 0.0;
  const double n = n0 + n1;
  if (n0 > 0) h -= n0 * std::log(n0 / n);
  if (n1 > 0) h -= n1 * std::log(n1 / n);
  return h;
}

}  // namespace detail

/// Greedy information-gain cuts for one continuous column. Each round inserts
/// the single midpoint cut (over all current bins) with the largest gain; stops
/// at max_bins or when no cut has positive gain. Ties go to the lowest cut.
inline std::vector<double> fit_cuts(std::span<const double> values, std::span<const int> targets,
                                    std::size_t max_bins) {
  if (values.size() != targets.size()) throw Error("fit_cuts: length mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  // Distinct values with class counts.
  std::vector<double> distinct;
  std::vector<double> c0, c1;
  for (std::size_t i : order) {
    if (distinct.empty() || values[i] != distinct.back()) {
      distinct.push_back(values[i]);
      c0.push_back(0);
      c1.push_back(0);
    }
    (targets[i] ? c1 : c0).back() += 1;
  }
  const std::size_t m = distinct.size();
  std::vector<double> p0(m + 1, 0.0), p1(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    p0[i + 1] = p0[i] + c0[i];
    p1[i + 1] = p1[i] + c1[i];
  }
  // Boundaries are split positions s in (0, m): cut between distinct[s-1], distinct[s].
  std::vector<std::size_t> boundaries{0, m};
  constexpr double kMinGain = 1e-12;
  while (boundaries.size() - 1 < max_bins && m > 1) {
    double best_gain = kMinGain;
    std::size_t best_split = 0;
    for (std::size_t b = 0; b + 1 < boundaries.size(); ++b) {
      const std::size_t lo = boundaries[b], hi = boundaries[b + 1];
      const double parent = detail::binary_entropy_mass(p0[hi] - p0[lo], p1[hi] - p1[lo]);
      for (std::size_t s = lo + 1; s < hi; ++s) {
        const double left = detail::binary_entropy_mass(p0[s] - p0[lo], p1[s] - p1[lo]);
        const double right = detail::binary_entropy_mass(p0[hi] - p0[s], p1[hi] - p1[s]);
        const double gain = parent - left - right;
        if (gain > best_gain) {
          best_gain = gain;
          best_split = s;
        }
      }
    }
    if (best_split == 0) break;
    boundaries.insert(std::upper_bound(boundaries.begin(), boundaries.end(), best_split),
                      best_split);
  }
  std::vector<double> cuts;
  for (std::size_t b = 1; b + 1 < boundaries.size(); ++b) {
    const std::size_t s = boundaries[b];
    double mid = 0.5 * (distinct[s - 1] + distinct[s]);
    if (!(mid < distinct[s])) mid = distinct[s - 1];
    cuts.push_back(mid);
  }
  return cuts;
}

/// Fits cuts for every continuous feature of `data` restricted to `rows`,
/// with `targets[k]` the class of `rows[k]`.
inline Discretizer fit_discretizer(const TabularDataset& data, std::span<const std::size_t> rows,
                                   std::span<const int> targets, std::size_t max_bins = 8) {
  if (rows.size() != targets.size()) throw Error("fit_discretizer: targets length mismatch");
  if (max_bins < 2) throw Error("fit_discretizer: max_bins must be >= 2");
  std::vector<std::vector<double>> cuts(data.num_features());
  std::vector<double> column(rows.size());
  for (std::size_t j = 0; j < data.num_features(); ++j) {
    if (data.feature(j).is_categorical()) continue;
    for (std::size_t k = 0; k < rows.size(); ++k) column[k] = data.at(rows[k], j);
    cuts[j] = fit_cuts(column, targets, max_bins);
  }
  return Discretizer(data.schema(), std::move(cuts));
}

/// Whole-dataset overload: targets are one per row.
inline Discretizer fit_discretizer(const TabularDataset& data, std::span<const int> targets,
                                   std::size_t max_bins = 8) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_discretizer(data, rows, targets, max_bins);
}

}  // namespace xal
