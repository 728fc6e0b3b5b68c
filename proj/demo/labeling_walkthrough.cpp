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

// Walks through a few rounds of explained uncertainty sampling on the
// four-Gaussian toy data, printing each query, its explanation and the
// per-quadrant bias after the refit. Then composes one interpretable batch.
//
//   xal_demo [steps]

#include <cstdlib>
#include <iostream>

#include "xal/xal.hpp"

int main(int argc, char** argv) {
  const std::size_t steps = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 5;

  const xal::TabularDataset data = xal::generate_toy(7, 400);
  const xal::RegionSpec regions = xal::RegionSpec::from_group(data);

  // Initial labels from the Q1 and Q3 centres only.
  xal::ExperimentConfig cfg = xal::preset_config("toy-fig2");
  xal::RunSpec rs{cfg.initial_size, xal::initial_candidates(cfg, data), steps, 42};
  xal::Learner learner(data, regions, cfg.learner, xal::sample_initial_pool(data.size(), rs), rs.seed);
  xal::SimulatedOracle oracle(data);

  auto print_biases = [&] {
    const auto b = learner.latest_biases();
    for (std::size_t r = 0; r < b.size(); ++r) {
      std::cout << "  " << regions.names()[r] << " bias "
                << (b[r] ? xal::format_number(*b[r]) : std::string("undefined")) << "\n";
    }
  };

  std::cout << "initial model, " << learner.state().labeled.size() << " labels\n";
  print_biases();
  for (std::size_t s = 0; s < steps; ++s) {
    const auto rec = learner.step(oracle);
    if (!rec) continue;
    const auto row = data.row(rec->query_index);
    std::cout << "\nround " << rec->round << ": query " << rec->query_index << " at ("
              << xal::format_number(row[0]) << ", " << xal::format_number(row[1]) << ") in "
              << regions.names()[rec->region] << ", certainty " << xal::format_number(rec->certainty)
              << ", label " << rec->label << "\n";
    std::cout << "  why uncertain: " << rec->explanation->to_string() << "\n";
    std::cout << "  region: " << rec->explanation->region().to_string() << "\n";
    print_biases();
  }

  xal::BatchRequest req{10, xal::BatchStrategy::kmeans_uncertain, {"x", "y"}};
  const auto batch = xal::compose_batch(learner, req, 1);
  std::cout << "\n" << xal::render_batch_explanation(batch, data, req.interpretable_features);
  return 0;
}
