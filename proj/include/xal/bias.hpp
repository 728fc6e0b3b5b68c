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

// Uncertainty bias of a region: one minus the disparate-impact ratio between
// the certain-point rate inside the region and the rate over the rest of the
// tracked regions,
//
//   bias(r) = 1 - Pr(U = + | x in r) / Pr(U = + | x in R \ r),
//
// where U = + marks points whose certainty is at least the pool median.
// Undefined values (empty side, zero denominator) are std::nullopt, never 0.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xal/common.hpp"
#include "xal/dataset.hpp"
#include "xal/explain.hpp"
#include "xal/models.hpp"

namespace xal {

struct CertaintyLabels {
  std::vector<std::uint8_t> certain;  // 1 = '+', 0 = '-'
  double threshold = 0.0;             // pool median certainty

  std::size_t size() const { return certain.size(); }
};

/// U = + iff certainty >= median over all given values.
inline CertaintyLabels certainty_labels(std::span<const double> certainties) {
  CertaintyLabels u;
  u.threshold = median(std::vector<double>(certainties.begin(), certainties.end()));
  u.certain.resize(certainties.size());
  for (std::size_t i = 0; i < certainties.size(); ++i) {
    u.certain[i] = certainties[i] >= u.threshold ? 1 : 0;
  }
  return u;
}

template <ProbabilisticModel M>
std::vector<double> pool_certainties(const M& model, const TabularDataset& data) {
  std::vector<double> c(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) c[i] = certainty(model, data.row(i));
  return c;
}

/// Bias of `members` against `universe \ members`. `members` must be a subset
/// of `universe`; indices refer to U.
inline std::optional<double> uncertainty_bias(const CertaintyLabels& U,
                                              std::span<const std::size_t> members,
                                              std::span<const std::size_t> universe) {
  std::vector<std::uint8_t> inside(U.size(), 0);
  for (std::size_t i : members) {
    if (i >= U.size()) throw Error("uncertainty_bias: member index out of range");
    inside[i] = 1;
  }
  std::size_t n_in = 0, c_in = 0, n_out = 0, c_out = 0;
  for (std::size_t i : universe) {
    if (i >= U.size()) throw Error("uncertainty_bias: universe index out of range");
    if (inside[i]) {
      ++n_in;
      c_in += U.certain[i];
      inside[i] = 2;
    } else {
      ++n_out;
      c_out += U.certain[i];
    }
  }
  for (std::size_t i : members) {
    if (inside[i] != 2) throw Error("uncertainty_bias: members must be a subset of the universe");
  }
  if (n_in == 0 || n_out == 0 || c_out == 0) return std::nullopt;
  const double in_rate = static_cast<double>(c_in) / static_cast<double>(n_in);
  const double out_rate = static_cast<double>(c_out) / static_cast<double>(n_out);
  return 1.0 - in_rate / out_rate;
}

enum class RegionKind { group_attribute, constraint_sets, cluster_assignment };

/// Named, pairwise disjoint regions over dataset rows. Rows outside every
/// region are untracked and excluded from the universe R.
class RegionSpec {
 public:
  RegionSpec() = default;
  RegionSpec(RegionKind kind, std::vector<std::string> names, std::vector<int> assignment)
      : kind_(kind), names_(std::move(names)), assignment_(std::move(assignment)) {
    for (int a : assignment_) {
      if (a < -1 || a >= static_cast<int>(names_.size())) throw Error("region id out of range");
    }
  }

  /// One region per listed level of the group attribute (all levels if empty).
  static RegionSpec from_group(const TabularDataset& data, std::vector<std::string> levels = {}) {
    if (!data.group()) throw Error("dataset has no group attribute");
    const auto& g = *data.group();
    if (levels.empty()) levels = g.levels;
    std::vector<int> level_to_region(g.levels.size(), -1);
    for (std::size_t r = 0; r < levels.size(); ++r) {
      const int li = g.level_index(levels[r]);
      if (li < 0) throw Error("unknown group level '" + levels[r] + "'");
      level_to_region[li] = static_cast<int>(r);
    }
    std::vector<int> assignment(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) assignment[i] = level_to_region[g.codes[i]];
    return RegionSpec(RegionKind::group_attribute, std::move(levels), std::move(assignment));
  }

  /// Explicit constraint conjunctions. Throws if any row matches two regions.
  static RegionSpec from_constraints(const TabularDataset& data, std::vector<std::string> names,
                                     const std::vector<UncertaintyRegion>& regions) {
    if (names.size() != regions.size()) throw Error("one name per constraint region");
    std::vector<int> assignment(data.size(), -1);
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t r = 0; r < regions.size(); ++r) {
        if (!regions[r].contains(data.row(i))) continue;
        if (assignment[i] >= 0) {
          throw Error("regions '" + names[assignment[i]] + "' and '" + names[r] +
                      "' overlap; tracked regions must be disjoint");
        }
        assignment[i] = static_cast<int>(r);
      }
    }
    return RegionSpec(RegionKind::constraint_sets, std::move(names), std::move(assignment));
  }

  static RegionSpec from_assignment(std::vector<std::string> names, std::vector<int> assignment) {
    return RegionSpec(RegionKind::cluster_assignment, std::move(names), std::move(assignment));
  }

  RegionKind kind() const { return kind_; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& assignment() const { return assignment_; }
  int region_of(std::size_t row) const { return assignment_.empty() ? -1 : assignment_[row]; }

  std::vector<std::size_t> members(std::size_t r) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment_.size(); ++i) {
      if (assignment_[i] == static_cast<int>(r)) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> universe() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment_.size(); ++i) {
      if (assignment_[i] >= 0) out.push_back(i);
    }
    return out;
  }

 private:
  RegionKind kind_ = RegionKind::group_attribute;
  std::vector<std::string> names_;
  std::vector<int> assignment_;
};

/// Bias of every region in one O(N) pass. Agrees with uncertainty_bias on
/// (members(r), universe()).
inline std::vector<std::optional<double>> region_biases(const CertaintyLabels& U,
                                                        const RegionSpec& regions) {
  const std::size_t k = regions.size();
  std::vector<std::size_t> n(k, 0), c(k, 0);
  std::size_t n_all = 0, c_all = 0;
  for (std::size_t i = 0; i < regions.assignment().size(); ++i) {
    const int r = regions.assignment()[i];
    if (r < 0) continue;
    ++n[r];
    c[r] += U.certain[i];
    ++n_all;
    c_all += U.certain[i];
  }
  std::vector<std::optional<double>> out(k);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t n_out = n_all - n[r], c_out = c_all - c[r];
    if (n[r] == 0 || n_out == 0 || c_out == 0) continue;
    out[r] = 1.0 - (static_cast<double>(c[r]) / n[r]) / (static_cast<double>(c_out) / n_out);
  }
  return out;
}

/// Per-region bias and cumulative query count, one entry per round.
struct BiasSeries {
  std::vector<std::string> regions;
  std::vector<std::vector<std::optional<double>>> bias;  // [region][round]
  std::vector<std::vector<std::size_t>> counts;          // [region][round]

  explicit BiasSeries(std::vector<std::string> names = {})
      : regions(std::move(names)), bias(regions.size()), counts(regions.size()) {}

  std::size_t rounds() const { return bias.empty() ? 0 : bias.front().size(); }

  void append(const std::vector<std::optional<double>>& b, const std::vector<std::size_t>& n) {
    if (b.size() != regions.size() || n.size() != regions.size()) {
      throw Error("BiasSeries::append: one value per region");
    }
    for (std::size_t r = 0; r < regions.size(); ++r) {
      if (!counts[r].empty() && n[r] < counts[r].back()) throw Error("query counts must not decrease");
      bias[r].push_back(b[r]);
      counts[r].push_back(n[r]);
    }
  }
};

}  // namespace xal
