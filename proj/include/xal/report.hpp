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

// Tidy CSV/JSON artifacts. Every CSV opens with '#' comment lines holding the
// configuration that produced it; readers in this library skip them.
// Undefined values are written as empty cells.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xal/batch.hpp"
#include "xal/csv.hpp"
#include "xal/learner.hpp"

namespace xal::report {

inline std::string cell(const std::optional<double>& v) { return v ? format_exact(*v) : ""; }

inline void write_config_header(std::ostream& os, const std::string& config_text) {
  os << "# xal configuration\r\n";
  std::istringstream in(config_text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) os << "# " << line << "\r\n";
  }
}

inline void write_bias_history_header(std::ostream& os) {
  csv::write_record(os, {"run", "seed", "round", "region", "bias", "count"});
}

inline void write_bias_history(std::ostream& os, std::size_t run, std::uint64_t seed,
                               const BiasSeries& h) {
  for (std::size_t t = 0; t < h.rounds(); ++t) {
    for (std::size_t r = 0; r < h.regions.size(); ++r) {
      csv::write_record(os, {std::to_string(run), std::to_string(seed), std::to_string(t),
                             h.regions[r], cell(h.bias[r][t]), std::to_string(h.counts[r][t])});
    }
  }
}

inline void write_query_log_header(std::ostream& os, const std::vector<std::string>& regions) {
  std::vector<std::string> head{"run",    "seed",  "round",       "query_index",
                                "certainty", "label", "region", "explanation"};
  for (const auto& r : regions) head.push_back("bias_" + r);
  csv::write_record(os, head);
}

inline void write_query_log(std::ostream& os, std::size_t run, std::uint64_t seed,
                            const std::vector<std::string>& regions,
                            const std::vector<QueryRecord>& log) {
  for (const auto& q : log) {
    std::vector<std::string> rec{std::to_string(run),
                                 std::to_string(seed),
                                 std::to_string(q.round),
                                 std::to_string(q.query_index),
                                 format_exact(q.certainty),
                                 std::to_string(q.label),
                                 q.region >= 0 ? regions[q.region] : "",
                                 q.explanation ? q.explanation->to_json().dump() : ""};
    for (const auto& b : q.biases) rec.push_back(cell(b));
    csv::write_record(os, rec);
  }
}

inline void write_persistence(std::ostream& os, const PersistenceResult& p) {
  csv::write_record(os, {"pool", "pool_seed", "region", "initial_bias", "final_bias", "slope", "r2"});
  for (std::size_t r = 0; r < p.regions.size(); ++r) {
    for (std::size_t k = 0; k < p.pool_seeds.size(); ++k) {
      csv::write_record(os, {std::to_string(k), std::to_string(p.pool_seeds[k]), p.regions[r],
                             cell(p.pairs[r][k].first), cell(p.pairs[r][k].second),
                             format_exact(p.fits[r].slope), cell(p.fits[r].r2)});
    }
  }
}

inline void write_curves(std::ostream& os, const StrategyCurves& c) {
  csv::write_record(os, {"strategy", "run", "round", "labeled_count", "mcc", "tp", "fp", "fn", "tn"});
  for (const auto& p : c.points) {
    csv::write_record(os, {to_string(p.strategy), std::to_string(p.run), std::to_string(p.round),
                           std::to_string(p.labeled_count), cell(p.mcc),
                           std::to_string(p.confusion.tp), std::to_string(p.confusion.fp),
                           std::to_string(p.confusion.fn), std::to_string(p.confusion.tn)});
  }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("failed writing " + p.string());
}

/// Reads a CSV artifact; a missing file is fatal and names the expected file.
inline csv::Table read_artifact(const std::filesystem::path& dir, const std::string& name) {
  const auto p = dir / name;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("missing input: expected " + p.string());
  return csv::read(in);
}

/// Leading '#' lines of an artifact, line endings normalised to CRLF.
inline std::string comment_header(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] != '#') break;
    out += line + "\r\n";
  }
  return out;
}

inline std::size_t require_column(const csv::Table& t, const std::string& name,
                                  const std::string& file) {
  const int c = t.column(name);
  if (c < 0) throw Error(file + " has no '" + name + "' column");
  return static_cast<std::size_t>(c);
}

// ---------------------------------------------------------------------------
// Plot data

/// Mean bias and count per (round, region) across runs. Undefined biases are
/// left out of the mean; a round with none defined gets an empty cell.
inline void emit_history(const csv::Table& t, std::ostream& os) {
  const std::string file = "bias_history.csv";
  const auto c_round = require_column(t, "round", file);
  const auto c_region = require_column(t, "region", file);
  const auto c_bias = require_column(t, "bias", file);
  const auto c_count = require_column(t, "count", file);
  struct Acc {
    double bias = 0.0, count = 0.0;
    std::size_t n_bias = 0, n = 0;
  };
  std::map<std::pair<long long, std::string>, Acc> acc;
  std::vector<std::string> region_order;
  for (const auto& row : t.rows) {
    const auto round = parse_int(row.at(c_round));
    if (!round) throw Error(file + ": bad round '" + row.at(c_round) + "'");
    const std::string& region = row.at(c_region);
    if (std::find(region_order.begin(), region_order.end(), region) == region_order.end()) {
      region_order.push_back(region);
    }
    auto& a = acc[{*round, region}];
    if (const auto b = parse_double(row.at(c_bias))) {
      a.bias += *b;
      ++a.n_bias;
    }
    a.count += parse_double(row.at(c_count)).value_or(0.0);
    ++a.n;
  }
  csv::write_record(os, {"round", "region", "bias", "count", "runs_defined"});
  std::map<long long, bool> rounds;
  for (const auto& [k, a] : acc) rounds[k.first] = true;
  for (const auto& [round, unused] : rounds) {
    for (const auto& region : region_order) {
      const auto it = acc.find({round, region});
      if (it == acc.end()) continue;
      const auto& a = it->second;
      csv::write_record(os, {std::to_string(round), region,
                             a.n_bias ? format_exact(a.bias / a.n_bias) : "",
                             format_exact(a.count / a.n), std::to_string(a.n_bias)});
    }
  }
}

/// Mean MCC per (strategy, round) across runs.
inline void emit_curves(const csv::Table& t, std::ostream& os) {
  const std::string file = "curves.csv";
  const auto c_strategy = require_column(t, "strategy", file);
  const auto c_round = require_column(t, "round", file);
  const auto c_labeled = require_column(t, "labeled_count", file);
  const auto c_mcc = require_column(t, "mcc", file);
  struct Acc {
    double mcc = 0.0, labeled = 0.0;
    std::size_t n_mcc = 0, n = 0;
  };
  std::vector<std::string> order;
  std::map<std::pair<std::string, long long>, Acc> acc;
  for (const auto& row : t.rows) {
    const auto& s = row.at(c_strategy);
    if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
    const auto round = parse_int(row.at(c_round));
    if (!round) throw Error(file + ": bad round '" + row.at(c_round) + "'");
    auto& a = acc[{s, *round}];
    if (const auto m = parse_double(row.at(c_mcc))) {
      a.mcc += *m;
      ++a.n_mcc;
    }
    a.labeled += parse_double(row.at(c_labeled)).value_or(0.0);
    ++a.n;
  }
  csv::write_record(os, {"strategy", "round", "labeled_count", "mcc"});
  for (const auto& s : order) {
    for (const auto& [key, a] : acc) {
      if (key.first != s) continue;
      csv::write_record(os, {s, std::to_string(key.second), format_exact(a.labeled / a.n),
                             a.n_mcc ? format_exact(a.mcc / a.n_mcc) : ""});
    }
  }
}

/// Initial vs final bias per pool with the per-region fit.
inline void emit_scatter(const csv::Table& t, std::ostream& os) {
  const std::string file = "persistence.csv";
  const std::vector<std::string> cols{"pool_seed", "region", "initial_bias", "final_bias", "slope", "r2"};
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(require_column(t, c, file));
  csv::write_record(os, cols);
  for (const auto& row : t.rows) {
    std::vector<std::string> rec;
    for (std::size_t i : idx) rec.push_back(row.at(i));
    csv::write_record(os, rec);
  }
}

enum class PlotKind { history, curves, scatter };

inline PlotKind parse_plot_kind(std::string_view s) {
  if (s == "history") return PlotKind::history;
  if (s == "curves") return PlotKind::curves;
  if (s == "scatter") return PlotKind::scatter;
  throw ConfigError("plot kind must be history, curves or scatter");
}

inline const char* input_file(PlotKind k) {
  switch (k) {
    case PlotKind::history:
      return "bias_history.csv";
    case PlotKind::curves:
      return "curves.csv";
    case PlotKind::scatter:
      return "persistence.csv";
  }
  return "";
}

inline const char* output_file(PlotKind k) {
  switch (k) {
    case PlotKind::history:
      return "plot_history.csv";
    case PlotKind::curves:
      return "plot_curves.csv";
    case PlotKind::scatter:
      return "plot_scatter.csv";
  }
  return "";
}

/// Reads the run artifact for `kind` from `run_dir` and writes the plot table
/// to `out_dir`. Returns the written path.
inline std::filesystem::path emit_plot_data(PlotKind kind, const std::filesystem::path& run_dir,
                                            const std::filesystem::path& out_dir) {
  const auto table = read_artifact(run_dir, input_file(kind));
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / output_file(kind);
  std::ostringstream os;
  os << comment_header(run_dir / input_file(kind));
  switch (kind) {
    case PlotKind::history:
      emit_history(table, os);
      break;
    case PlotKind::curves:
      emit_curves(table, os);
      break;
    case PlotKind::scatter:
      emit_scatter(table, os);
      break;
  }
  write_text_file(path, os.str());
  return path;
}

}  // namespace xal::report
