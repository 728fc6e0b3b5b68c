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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "xal/report.hpp"

namespace xal::report {
namespace {

namespace fs = std::filesystem;

csv::Table table(const std::string& text) {
  std::istringstream is(text);
  return csv::read(is);
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "xal_report_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

TEST(EmitHistory, HeaderOnlyInputGivesHeaderOnlyOutput) {
  std::ostringstream os;
  emit_history(table("run,seed,round,region,bias,count\r\n"), os);
  EXPECT_EQ(os.str(), "round,region,bias,count,runs_defined\r\n");
}

TEST(EmitHistory, AveragesDefinedValuesOnly) {
  std::ostringstream os;
  emit_history(table("run,seed,round,region,bias,count\n"
                     "0,1,0,A,0.5,0\n"
                     "1,2,0,A,,0\n"
                     "0,1,0,B,,0\n"
                     "1,2,0,B,,0\n"
                     "0,1,1,A,0.25,1\n"
                     "1,2,1,A,0.75,2\n"),
               os);
  const auto out = table(os.str());
  ASSERT_EQ(out.rows.size(), 3u);
  EXPECT_EQ(out.rows[0], (std::vector<std::string>{"0", "A", "0.5", "0", "1"}));
  EXPECT_EQ(out.rows[1], (std::vector<std::string>{"0", "B", "", "0", "0"}));
  EXPECT_EQ(out.rows[2], (std::vector<std::string>{"1", "A", "0.5", "1.5", "2"}));
}

TEST(EmitHistory, MissingColumnIsNamed) {
  std::ostringstream os;
  try {
    emit_history(table("run,round,region,count\n"), os);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "bias_history.csv has no 'bias' column");
  }
}

TEST(EmitPlotData, MissingInputNamesExpectedFile) {
  const auto dir = scratch("missing");
  try {
    emit_plot_data(PlotKind::curves, dir, dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find((dir / "curves.csv").string()), std::string::npos);
  }
  EXPECT_THROW(parse_plot_kind("bars"), ConfigError);
}

TEST(EmitPlotData, ScatterOfExactLineHasUnitR2AndKeepsHeader) {
  PersistenceResult p;
  p.regions = {"R"};
  p.pool_seeds = {11, 12, 13, 14};
  p.pairs.resize(1);
  std::vector<double> xs, ys;
  for (double x : {-0.2, 0.0, 0.1, 0.4}) {
    p.pairs[0].emplace_back(x, 2 * x + 0.1);
    xs.push_back(x);
    ys.push_back(2 * x + 0.1);
  }
  p.fits.push_back(fit_line(xs, ys));
  p.excluded.push_back(0);
  const auto dir = scratch("scatter");
  std::ostringstream os;
  write_config_header(os, "experiment = persistence\nloop.seed = 3\n");
  write_persistence(os, p);
  write_text_file(dir / "persistence.csv", os.str());

  const auto path = emit_plot_data(PlotKind::scatter, dir, dir / "plots");
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str().rfind("# xal configuration\r\n# experiment = persistence\r\n", 0), 0u);
  const auto t = csv::read(ss);
  ASSERT_EQ(t.rows.size(), 4u);
  const int c_r2 = t.column("r2"), c_slope = t.column("slope");
  EXPECT_NEAR(*parse_double(t.rows[0][c_r2]), 1.0, 1e-12);
  EXPECT_NEAR(*parse_double(t.rows[0][c_slope]), 2.0, 1e-12);
}

TEST(EmitCurves, MeanPerStrategyAndRound) {
  std::ostringstream os;
  emit_curves(table("strategy,run,round,labeled_count,mcc\n"
                    "random,0,0,50,0.2\n"
                    "random,1,0,50,0.4\n"
                    "q_best,0,0,50,\n"),
              os);
  const auto out = table(os.str());
  ASSERT_EQ(out.rows.size(), 2u);
  EXPECT_EQ(out.rows[0][0], "random");
  EXPECT_NEAR(*parse_double(out.rows[0][3]), 0.3, 1e-15);
  EXPECT_EQ(out.rows[1][3], "");
}

TEST(QueryLog, ExplanationJsonSurvivesCsvQuoting) {
  QueryRecord q;
  q.round = 2;
  q.query_index = 17;
  q.certainty = 0.625;
  q.label = 1;
  q.region = 0;
  Explanation e;
  e.constraints.push_back({BinConstraint{}, -0.25});
  q.explanation = e;
  q.biases = {0.1, std::nullopt};
  std::ostringstream os;
  write_query_log_header(os, {"A", "B"});
  write_query_log(os, 0, 99, {"A", "B"}, {q});
  const auto t = table(os.str());
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][t.column("region")], "A");
  EXPECT_EQ(nlohmann::json::parse(t.rows[0][t.column("explanation")]), e.to_json());
  EXPECT_EQ(t.rows[0][t.column("bias_B")], "");
}

}  // namespace
}  // namespace xal::report
