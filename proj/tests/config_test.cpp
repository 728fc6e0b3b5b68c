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

#include <cstdlib>

#include "gtest/gtest.h"
#include "xal/config.hpp"

namespace xal {
namespace {

int error_line(std::string_view text) {
  try {
    ExperimentConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

TEST(ExperimentConfig, DefaultsAndKeys) {
  const auto c = ExperimentConfig::parse(
      "experiment = tracking\n"
      "dataset.kind = toy\n"
      "dataset.n_per_gaussian = 40\n"
      "explainer.k = 3\n"
      "explainer.kernel_width = 1.5\n"
      "loop.initial_groups = Q1, Q3\n"
      "loop.explain = false\n");
  EXPECT_EQ(c.dataset.n_per_gaussian, 40u);
  EXPECT_EQ(c.learner.explainer.num_features, 3u);
  EXPECT_EQ(*c.learner.explainer.kernel_width, 1.5);
  EXPECT_EQ(c.initial_groups, (std::vector<std::string>{"Q1", "Q3"}));
  EXPECT_FALSE(c.learner.explain_queries);
  EXPECT_EQ(c.steps, 200u);
}

TEST(ExperimentConfig, DiagnosticsCarryLineNumbers) {
  EXPECT_EQ(error_line("experiment = tracking\n\nbogus = 1\n"), 3);
  EXPECT_EQ(error_line("experiment = sideways\n"), 1);
  EXPECT_EQ(error_line("loop.steps = -4\n"), 1);
  EXPECT_EQ(error_line("# c\nloop.steps = 1.5\n"), 2);
  EXPECT_EQ(error_line("model.l2 = -1\n"), 1);
  EXPECT_EQ(error_line("explainer.kernel_width = 0\n"), 1);
  EXPECT_EQ(error_line("experiment = batch\nbatch.strategies = random, greedy\n"), 2);
  EXPECT_EQ(error_line("batch.test_fraction = 1\n"), 1);
  EXPECT_EQ(error_line("loop.explain = maybe\n"), 1);
  // Cross-field checks point at the offending key.
  EXPECT_EQ(error_line("dataset.features = 4\ndataset.informative = 9\n"), 2);
  EXPECT_EQ(error_line("dataset.kind = surrogate\nregions.kind = group\n"), 2);
  EXPECT_EQ(error_line("explainer.k = 5\nexplainer.samples = 5\n"), 2);
  EXPECT_EQ(error_line("cluster.k_min = 5\ncluster.k_max = 3\n"), 2);
  EXPECT_EQ(error_line("dataset.kind = csv\n"), 1);
  EXPECT_EQ(error_line("this line has no separator\n"), 1);
}

TEST(ExperimentConfig, EveryPresetRoundTrips) {
  for (const auto& p : presets()) {
    const auto c = preset_config(p.name);
    const auto text = c.to_text();
    EXPECT_EQ(ExperimentConfig::parse(text).to_text(), text) << p.name;
  }
  EXPECT_THROW(preset_config("nope"), ConfigError);
}

TEST(ExperimentConfig, PresetContents) {
  const auto toy = preset_config("toy-fig2");
  EXPECT_EQ(toy.n_runs, 50u);
  EXPECT_EQ(toy.steps, 200u);
  EXPECT_EQ(toy.initial_groups, (std::vector<std::string>{"Q1", "Q3"}));
  const auto batch = preset_config("batch-fig5");
  EXPECT_EQ(batch.experiment, ExperimentKind::batch);
  EXPECT_EQ(batch.batch.batch_size, 20u);
  EXPECT_EQ(batch.batch.strategies.size(), 4u);
  const auto clusters = preset_config("clusters-fig7");
  EXPECT_EQ(clusters.learner.explainer.num_features, 2u);
  EXPECT_FALSE(clusters.cluster.fixed_k);
}

TEST(ExperimentConfig, OverridesSurviveRoundTrip) {
  auto c = preset_config("toy-fig2");
  c.steps = 7;
  c.learner.explainer.kernel_width = 0.3;
  const auto back = ExperimentConfig::parse(c.to_text());
  EXPECT_EQ(back.steps, 7u);
  EXPECT_EQ(*back.learner.explainer.kernel_width, 0.3);
  EXPECT_EQ(back.learner.model.logistic.tol, c.learner.model.logistic.tol);
}

TEST(ExperimentDataset, ToyCandidatesAndRegions) {
  const auto c = preset_config("toy-fig2");
  const auto data = load_experiment_dataset(c.dataset);
  EXPECT_EQ(data.size(), 1600u);
  const auto cand = initial_candidates(c, data);
  EXPECT_EQ(cand.size(), 800u);
  for (std::size_t i : cand) {
    const auto& level = data.group()->levels[data.group()->codes[i]];
    EXPECT_TRUE(level == "Q1" || level == "Q3");
  }
  EXPECT_EQ(experiment_regions(c, data).size(), 4u);
  auto none = c;
  none.region_kind = "none";
  EXPECT_EQ(experiment_regions(none, data).size(), 0u);
  none.initial_groups = {"Q7"};
  EXPECT_THROW(initial_candidates(none, data), ConfigError);
}

TEST(ExperimentDataset, MissingManifestNamesTheDataDirectory) {
  ::setenv("XAL_DATA_DIR", "/nonexistent/xal", 1);
  EXPECT_EQ(data_dir(), "/nonexistent/xal");
  DatasetSpec spec;
  spec.kind = DatasetKind::csv;
  spec.manifest = "propublica/propublica.manifest";
  try {
    load_experiment_dataset(spec);
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("XAL_DATA_DIR"), std::string::npos);
  }
  ::unsetenv("XAL_DATA_DIR");
}

TEST(RunSeed, DistinctPerRun) {
  EXPECT_NE(run_seed(1, 0), run_seed(1, 1));
  EXPECT_EQ(run_seed(1, 3), mix_seed(1, 0x5EED + 3));
}

}  // namespace
}  // namespace xal
