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

#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xal/common.hpp"
#include "xal/csv.hpp"
#include "xal/keyvalue.hpp"

namespace xal {

enum class FeatureKind { continuous, categorical };

inline const char* to_string(FeatureKind k) {
  return k == FeatureKind::continuous ? "continuous" : "categorical";
}

struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::vector<std::string> categories;  // categorical only, ordered codes
  std::optional<std::string> display_hint;

  static FeatureSchema continuous(std::string name) {
    return {std::move(name), FeatureKind::continuous, {}, std::nullopt};
  }
  static FeatureSchema categorical(std::string name, std::vector<std::string> cats) {
    return {std::move(name), FeatureKind::categorical, std::move(cats), std::nullopt};
  }
  bool is_categorical() const { return kind == FeatureKind::categorical; }
  bool operator==(const FeatureSchema&) const = default;
};

/// Per-row categorical attribute used to define tracked regions (race,
/// quadrant, ...). Not a model input unless also listed as a feature.
struct GroupAttribute {
  std::string name;
  std::vector<std::string> levels;
  std::vector<int> codes;  // index into levels, one per row

  int level_index(std::string_view level) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] == level) return static_cast<int>(i);
    }
    return -1;
  }
  bool operator==(const GroupAttribute&) const = default;
};

/// N x d feature matrix (row-major, categoricals as category indices) with
/// binary labels. Immutable after construction.
class TabularDataset {
 public:
  TabularDataset(std::vector<FeatureSchema> schema, std::vector<double> values,
                 std::vector<int> labels,
                 std::optional<GroupAttribute> group = std::nullopt)
      : schema_(std::move(schema)),
        values_(std::move(values)),
        labels_(std::move(labels)),
        group_(std::move(group)) {
    validate();
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t num_features() const { return schema_.size(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * schema_.size(), schema_.size()};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * schema_.size() + j]; }
  const std::vector<double>& values() const { return values_; }

  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }

  const std::vector<FeatureSchema>& schema() const { return schema_; }
  const FeatureSchema& feature(std::size_t j) const { return schema_[j]; }
  const std::optional<GroupAttribute>& group() const { return group_; }

  std::size_t feature_index(std::string_view name) const {
    for (std::size_t j = 0; j < schema_.size(); ++j) {
      if (schema_[j].name == name) return j;
    }
    throw Error("unknown feature '" + std::string(name) + "'");
  }

  /// Rows `idx` in the given order, group attribute carried along.
  TabularDataset subset(std::span<const std::size_t> idx) const {
    std::vector<double> vals;
    vals.reserve(idx.size() * schema_.size());
    std::vector<int> labs;
    std::optional<GroupAttribute> grp;
    if (group_) grp = GroupAttribute{group_->name, group_->levels, {}};
    for (std::size_t i : idx) {
      const auto r = row(i);
      vals.insert(vals.end(), r.begin(), r.end());
      labs.push_back(labels_[i]);
      if (grp) grp->codes.push_back(group_->codes[i]);
    }
    return TabularDataset(schema_, std::move(vals), std::move(labs), std::move(grp));
  }

  /// Stable 64-bit FNV-1a hash of the schema, hex encoded.
  std::string schema_fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
      h ^= 0xff;
      h *= 0x100000001b3ULL;
    };
    for (const auto& f : schema_) {
      feed(f.name);
      feed(to_string(f.kind));
      for (const auto& c : f.categories) feed(c);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  bool operator==(const TabularDataset&) const = default;

 private:
  void validate() const {
    if (labels_.empty()) throw Error("dataset must have at least one row");
    if (schema_.empty()) throw Error("dataset must have at least one feature");
    if (values_.size() != labels_.size() * schema_.size()) {
      throw Error("dataset: value count does not match rows x features");
    }
    std::set<std::string> names;
    for (const auto& f : schema_) {
      if (!names.insert(f.name).second) throw Error("duplicate feature name '" + f.name + "'");
      if (f.is_categorical() && f.categories.empty()) {
        throw Error("categorical feature '" + f.name + "' has no categories");
      }
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] != 0 && labels_[i] != 1) throw Error("labels must be 0 or 1");
      for (std::size_t j = 0; j < schema_.size(); ++j) {
        const double v = values_[i * schema_.size() + j];
        if (!std::isfinite(v)) throw Error("non-finite value in dataset");
        if (schema_[j].is_categorical()) {
          if (v != std::floor(v) || v < 0 ||
              v >= static_cast<double>(schema_[j].categories.size())) {
            throw Error("invalid category index for feature '" + schema_[j].name + "'");
          }
        }
      }
    }
    if (group_) {
      if (group_->codes.size() != labels_.size()) throw Error("group length must equal row count");
      for (int c : group_->codes) {
        if (c < 0 || c >= static_cast<int>(group_->levels.size())) {
          throw Error("invalid group code");
        }
      }
    }
  }

  std::vector<FeatureSchema> schema_;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::optional<GroupAttribute> group_;
};

// ---------------------------------------------------------------------------
// Synthetic data

/// Quadrant of a point: Q1 = (+,+), Q2 = (-,+), Q3 = (-,-), Q4 = (+,-).
/// Points on an axis go to the lower-numbered adjacent quadrant.
inline int quadrant(double x, double y) {
  if (x >= 0 && y >= 0) return 1;
  if (x < 0 && y >= 0) return 2;
  if (x < 0 && y < 0) return 3;
  return 4;
}

/// Four unit-variance Gaussians centred at (-3,-3), (3,-3), (3,3), (-3,3),
/// labelled 0, 0, 1, 1. Rows are grouped by centre in that order; the group
/// attribute "quadrant" holds the quadrant of the generating centre.
inline TabularDataset generate_toy(std::uint64_t seed, std::size_t n_per_gaussian) {
  if (n_per_gaussian < 1) throw Error("generate_toy: n_per_gaussian must be >= 1");
  constexpr std::array<std::array<double, 2>, 4> kCenters{
      {{-3.0, -3.0}, {3.0, -3.0}, {3.0, 3.0}, {-3.0, 3.0}}};
  constexpr std::array<int, 4> kLabels{0, 0, 1, 1};
  Rng rng(seed);
  std::vector<double> values;
  std::vector<int> labels;
  GroupAttribute group{"quadrant", {"Q1", "Q2", "Q3", "Q4"}, {}};
  values.reserve(8 * n_per_gaussian);
  for (std::size_t c = 0; c < kCenters.size(); ++c) {
    const int q = quadrant(kCenters[c][0], kCenters[c][1]);
    for (std::size_t i = 0; i < n_per_gaussian; ++i) {
      values.push_back(rng.normal(kCenters[c][0], 1.0));
      values.push_back(rng.normal(kCenters[c][1], 1.0));
      labels.push_back(kLabels[c]);
      group.codes.push_back(q - 1);
    }
  }
  return TabularDataset({FeatureSchema::continuous("x"), FeatureSchema::continuous("y")},
                        std::move(values), std::move(labels), std::move(group));
}

/// Ground truth behind generate_surrogate_highdim.
struct SurrogateTruth {
  std::vector<std::size_t> informative;
  std::vector<double> weights;  // aligned with informative

  double probability(std::span<const double> row) const {
    double z = 0.0;
    for (std::size_t i = 0; i < informative.size(); ++i) z += weights[i] * row[informative[i]];
    return 1.0 / (1.0 + std::exp(-z));
  }
};

/// High-dimensional stand-in for a wide tabular science dataset: standard
/// normal features, labels drawn from a sparse logistic model over the
/// informative subset only.
inline TabularDataset generate_surrogate_highdim(std::uint64_t seed, std::size_t n_rows,
                                                 std::size_t n_features,
                                                 std::size_t n_informative,
                                                 SurrogateTruth* truth_out = nullptr) {
  if (n_informative > n_features) throw Error("n_informative must be <= n_features");
  if (n_rows < 1 || n_features < 1) throw Error("surrogate needs at least one row and feature");
  Rng truth_rng(mix_seed(seed, 1));
  Rng feature_rng(mix_seed(seed, 2));
  Rng label_rng(mix_seed(seed, 3));

  SurrogateTruth truth;
  std::vector<std::size_t> all(n_features);
  std::iota(all.begin(), all.end(), std::size_t{0});
  truth.informative = truth_rng.sample(all, n_informative);
  std::sort(truth.informative.begin(), truth.informative.end());
  double norm = 0.0;
  for (std::size_t i = 0; i < n_informative; ++i) {
    const double w = (1.0 + truth_rng.uniform()) * (truth_rng.uniform() < 0.5 ? -1.0 : 1.0);
    truth.weights.push_back(w);
    norm += w * w;
  }
  // Logit standard deviation of 3 keeps the task learnable but not trivial.
  if (norm > 0) {
    for (auto& w : truth.weights) w *= 3.0 / std::sqrt(norm);
  }

  std::vector<FeatureSchema> schema;
  for (std::size_t j = 0; j < n_features; ++j) {
    char name[32];
    std::snprintf(name, sizeof(name), "f%03zu", j);
    schema.push_back(FeatureSchema::continuous(name));
  }
  std::vector<double> values(n_rows * n_features);
  std::vector<int> labels(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < n_features; ++j) values[i * n_features + j] = feature_rng.normal();
    const double p = truth.probability({values.data() + i * n_features, n_features});
    labels[i] = label_rng.uniform() < p ? 1 : 0;
  }
  if (truth_out) *truth_out = truth;
  return TabularDataset(std::move(schema), std::move(values), std::move(labels));
}

// ---------------------------------------------------------------------------
// CSV ingestion

/// Row filter applied during ingestion, e.g. `days_b_screening_arrest >= -30`
/// or `c_charge_degree in F, M`.
struct RowFilter {
  enum class Op { lt, le, gt, ge, eq, ne, in };
  std::string column;
  Op op = Op::eq;
  std::vector<std::string> values;

  static RowFilter parse(std::string_view text, int line = 0) {
    const auto parts = split(trim(text), ' ');
    std::vector<std::string> tok;
    for (const auto& p : parts) {
      if (!p.empty()) tok.push_back(p);
    }
    if (tok.size() < 3) throw ConfigError("filter needs '<column> <op> <value>'", line);
    RowFilter f;
    f.column = tok[0];
    static const std::map<std::string, Op> ops{{"<", Op::lt},  {"<=", Op::le}, {">", Op::gt},
                                               {">=", Op::ge}, {"==", Op::eq}, {"=", Op::eq},
                                               {"!=", Op::ne}, {"in", Op::in}};
    const auto it = ops.find(tok[1]);
    if (it == ops.end()) throw ConfigError("unknown filter operator '" + tok[1] + "'", line);
    f.op = it->second;
    std::string rest;
    for (std::size_t i = 2; i < tok.size(); ++i) rest += (i > 2 ? " " : "") + tok[i];
    if (f.op == Op::in) {
      f.values = split(rest, ',');
    } else {
      f.values = {rest};
    }
    if ((f.op == Op::lt || f.op == Op::le || f.op == Op::gt || f.op == Op::ge) &&
        !parse_double(f.values[0])) {
      throw ConfigError("filter bound '" + f.values[0] + "' is not numeric", line);
    }
    return f;
  }

  /// nullopt when the cell is missing or not comparable.
  std::optional<bool> accepts(std::string_view cell) const {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    switch (op) {
      case Op::in:
        return std::find(values.begin(), values.end(), cell) != values.end();
      case Op::eq:
      case Op::ne: {
        bool equal;
        const auto a = parse_double(cell), b = parse_double(values[0]);
        if (a && b) {
          equal = *a == *b;
        } else {
          equal = cell == values[0];
        }
        return op == Op::eq ? equal : !equal;
      }
      default: {
        const auto v = parse_double(cell);
        if (!v) return std::nullopt;
        const double b = *parse_double(values[0]);
        if (op == Op::lt) return *v < b;
        if (op == Op::le) return *v <= b;
        if (op == Op::gt) return *v > b;
        return *v >= b;
      }
    }
  }
};

struct CleaningSpec {
  std::vector<RowFilter> filters;
  bool strict_categories = false;  // unknown category is fatal when set
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t filtered_out = 0;
  std::size_t dropped_missing = 0;  // missing or unparseable required cells
};

inline std::optional<int> parse_label(std::string_view s) {
  s = trim(s);
  if (s == "1" || s == "true" || s == "True" || s == "TRUE") return 1;
  if (s == "0" || s == "false" || s == "False" || s == "FALSE") return 0;
  if (const auto v = parse_double(s); v && (*v == 0.0 || *v == 1.0)) return static_cast<int>(*v);
  return std::nullopt;
}

inline TabularDataset load_csv(const std::string& path, std::vector<FeatureSchema> schema,
                               const std::string& label_column,
                               const std::optional<std::string>& group_column,
                               const CleaningSpec& cleaning, LoadReport* report = nullptr,
                               std::vector<std::string> group_levels = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  const csv::Table table = csv::read(in);

  const int label_col = table.column(label_column);
  if (label_col < 0) throw Error("label column '" + label_column + "' not found in " + path);
  int group_col = -1;
  if (group_column) {
    group_col = table.column(*group_column);
    if (group_col < 0) throw Error("group column '" + *group_column + "' not found in " + path);
  }
  std::vector<int> feature_cols;
  for (const auto& f : schema) {
    const int c = table.column(f.name);
    if (c < 0) throw Error("feature column '" + f.name + "' not found in " + path);
    feature_cols.push_back(c);
  }
  std::vector<int> filter_cols;
  for (const auto& f : cleaning.filters) {
    const int c = table.column(f.column);
    if (c < 0) throw Error("filter column '" + f.column + "' not found in " + path);
    filter_cols.push_back(c);
  }

  LoadReport rep;
  std::vector<double> values;
  std::vector<int> labels;
  std::optional<GroupAttribute> group;
  if (group_column) group = GroupAttribute{*group_column, std::move(group_levels), {}};

  auto category_index = [&](FeatureSchema& f, std::string_view cell) -> int {
    for (std::size_t k = 0; k < f.categories.size(); ++k) {
      if (f.categories[k] == cell) return static_cast<int>(k);
    }
    if (cleaning.strict_categories) {
      throw Error("unknown category '" + std::string(cell) + "' for feature '" + f.name + "'");
    }
    f.categories.emplace_back(cell);
    return static_cast<int>(f.categories.size() - 1);
  };

  std::vector<double> row(schema.size());
  for (const auto& rec : table.rows) {
    ++rep.rows_read;
    auto cell = [&rec](int c) -> std::string_view {
      return c < static_cast<int>(rec.size()) ? trim(rec[c]) : std::string_view{};
    };
    bool missing = false, rejected = false;
    for (std::size_t k = 0; k < cleaning.filters.size() && !missing; ++k) {
      const auto ok = cleaning.filters[k].accepts(cell(filter_cols[k]));
      if (!ok) {
        missing = true;
      } else if (!*ok) {
        rejected = true;
      }
    }
    const auto label = parse_label(cell(label_col));
    if (!label) missing = true;
    if (group_col >= 0 && cell(group_col).empty()) missing = true;
    for (std::size_t j = 0; j < schema.size() && !missing; ++j) {
      const auto c = cell(feature_cols[j]);
      if (c.empty()) {
        missing = true;
      } else if (!schema[j].is_categorical() && !parse_double(c)) {
        missing = true;
      }
    }
    if (missing) {
      ++rep.dropped_missing;
      continue;
    }
    if (rejected) {
      ++rep.filtered_out;
      continue;
    }
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto c = cell(feature_cols[j]);
      row[j] = schema[j].is_categorical() ? category_index(schema[j], c) : *parse_double(c);
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(*label);
    if (group) {
      const auto g = cell(group_col);
      int code = group->level_index(g);
      if (code < 0) {
        group->levels.emplace_back(g);
        code = static_cast<int>(group->levels.size() - 1);
      }
      group->codes.push_back(code);
    }
  }
  rep.rows_kept = labels.size();
  if (report) *report = rep;
  return TabularDataset(std::move(schema), std::move(values), std::move(labels), std::move(group));
}

/// Everything needed to ingest one CSV, read from a key-value manifest:
///
///   csv = compas-scores-two-years.csv      (relative to the manifest)
///   label = two_year_recid
///   group = race
///   group_levels = African-American, Caucasian, Hispanic
///   feature = age : continuous
///   feature = sex : categorical : Female, Male
///   hint = priors_count : number of prior adult convictions
///   filter = days_b_screening_arrest >= -30
///   strict = false
struct DatasetManifest {
  std::string csv_path;
  std::string label_column;
  std::optional<std::string> group_column;
  std::vector<std::string> group_levels;
  std::vector<FeatureSchema> schema;
  CleaningSpec cleaning;

  static DatasetManifest from_document(const kv::Document& doc,
                                       const std::filesystem::path& base_dir) {
    DatasetManifest m;
    static const std::set<std::string> known{"csv",     "label",  "group", "group_levels",
                                             "feature", "hint",   "filter", "strict"};
    for (const auto& e : doc.entries()) {
      if (!known.count(e.key)) throw ConfigError("unknown manifest key '" + e.key + "'", e.line);
    }
    const auto* csv_e = doc.find("csv");
    if (!csv_e) throw ConfigError("manifest is missing 'csv'");
    std::filesystem::path p(csv_e->value);
    m.csv_path = (p.is_absolute() ? p : base_dir / p).string();
    const auto* label_e = doc.find("label");
    if (!label_e) throw ConfigError("manifest is missing 'label'");
    m.label_column = label_e->value;
    if (const auto* g = doc.find("group")) m.group_column = g->value;
    if (const auto* g = doc.find("group_levels")) m.group_levels = split(g->value, ',');
    for (const auto* e : doc.find_all("feature")) {
      const auto parts = split(e->value, ':');
      if (parts.size() < 2) throw ConfigError("feature needs '<name> : <kind>'", e->line);
      if (parts[1] == "continuous") {
        if (parts.size() != 2) throw ConfigError("continuous feature takes no categories", e->line);
        m.schema.push_back(FeatureSchema::continuous(parts[0]));
      } else if (parts[1] == "categorical") {
        std::vector<std::string> cats;
        if (parts.size() > 2) cats = split(parts[2], ',');
        m.schema.push_back(FeatureSchema::categorical(parts[0], cats));
      } else {
        throw ConfigError("unknown feature kind '" + parts[1] + "'", e->line);
      }
    }
    if (m.schema.empty()) throw ConfigError("manifest declares no features");
    for (const auto* e : doc.find_all("hint")) {
      const auto colon = e->value.find(':');
      if (colon == std::string::npos) throw ConfigError("hint needs '<name> : <text>'", e->line);
      const std::string name(trim(std::string_view(e->value).substr(0, colon)));
      bool found = false;
      for (auto& f : m.schema) {
        if (f.name == name) {
          f.display_hint = std::string(trim(std::string_view(e->value).substr(colon + 1)));
          found = true;
        }
      }
      if (!found) throw ConfigError("hint for unknown feature '" + name + "'", e->line);
    }
    for (const auto* e : doc.find_all("filter")) {
      m.cleaning.filters.push_back(RowFilter::parse(e->value, e->line));
    }
    if (const auto* s = doc.find("strict")) {
      if (s->value != "true" && s->value != "false") {
        throw ConfigError("strict must be true or false", s->line);
      }
      m.cleaning.strict_categories = s->value == "true";
    }
    return m;
  }

  static DatasetManifest load(const std::string& path) {
    return from_document(kv::Document::load(path),
                         std::filesystem::path(path).parent_path());
  }

  TabularDataset load_dataset(LoadReport* report = nullptr) const {
    return load_csv(csv_path, schema, label_column, group_column, cleaning, report, group_levels);
  }
};

/// Writes a dataset as CSV (header row, categories by name, label column last).
inline void write_dataset_csv(std::ostream& out, const TabularDataset& data) {
  std::vector<std::string> header;
  for (const auto& f : data.schema()) header.push_back(f.name);
  if (data.group()) header.push_back(data.group()->name);
  header.push_back("label");
  csv::write_record(out, header);
  std::vector<std::string> rec;
  for (std::size_t i = 0; i < data.size(); ++i) {
    rec.clear();
    for (std::size_t j = 0; j < data.num_features(); ++j) {
      const auto& f = data.feature(j);
      const double v = data.at(i, j);
      rec.push_back(f.is_categorical() ? f.categories[static_cast<std::size_t>(v)] : format_exact(v));
    }
    if (data.group()) rec.push_back(data.group()->levels[data.group()->codes[i]]);
    rec.push_back(std::to_string(data.label(i)));
    csv::write_record(out, rec);
  }
}

}  // namespace xal
