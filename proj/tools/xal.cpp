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

// Command line front end.
//
//   xal run [PRESET] [--config FILE] [--seed N] [--steps N] [--runs N] [--out DIR]
//   xal serve [--preset NAME | --config FILE] [--host H] [--port P]
//   xal emit history|curves|scatter --in RUN_DIR [--out DIR]
//   xal generate toy|surrogate [--seed N] --out FILE.csv
//   xal presets
//
// Exit status: 0 success, 2 invalid configuration or usage, 1 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "xal/config.hpp"
#include "xal/dataset.hpp"
#include "xal/report.hpp"
#include "xal/runner.hpp"
#include "xal/service.hpp"

namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string preset_pos;
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> runs;
  std::string out;
  std::size_t threads = 0;
};

xal::ExperimentConfig resolve_config(const std::string& preset, const std::string& config_path) {
  if (!preset.empty() && !config_path.empty()) {
    throw xal::ConfigError("give either a preset or --config, not both");
  }
  if (!config_path.empty()) return xal::ExperimentConfig::load(config_path);
  if (preset.empty()) throw xal::ConfigError("no experiment given: pass a preset name or --config FILE");
  return xal::preset_config(preset);
}

int cmd_run(const RunArgs& a) {
  const std::string preset = !a.preset.empty() ? a.preset : a.preset_pos;
  xal::ExperimentConfig cfg = resolve_config(preset, a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.steps) cfg.steps = *a.steps;
  if (a.runs) {
    if (*a.runs < 1) throw xal::ConfigError("--runs must be >= 1");
    cfg.n_runs = *a.runs;
  }
  // Overrides go through the same validation as a config file.
  cfg = xal::ExperimentConfig::parse(cfg.to_text());
  const fs::path out = a.out.empty() ? fs::path(cfg.output) : fs::path(a.out);
  const fs::path status = out / "run_status.json";
  try {
    std::error_code ec;
    fs::remove(status, ec);
    const auto summary = xal::run_configured(cfg, out, {a.threads, preset});
    std::cout << "wrote " << out.string() << ":";
    for (const auto& f : summary.files) std::cout << " " << f;
    std::cout << "\n" << summary.summary.dump() << "\n";
  } catch (const xal::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    // Anything already written in `out` is incomplete.
    std::error_code ec;
    fs::create_directories(out, ec);
    std::ofstream(status) << nlohmann::json{{"status", "failed"}, {"error", e.what()}}.dump(2) << "\n";
    throw;
  }
  return 0;
}

int cmd_serve(const std::string& preset, const std::string& config_path, const std::string& host,
              int port) {
  std::string name = config_path.empty() ? (preset.empty() ? "toy-fig2" : preset) : config_path;
  const xal::ExperimentConfig cfg =
      config_path.empty() ? xal::preset_config(name) : resolve_config(preset, config_path);
  xal::load_experiment_dataset(cfg.dataset);  // fail before binding if the data is unusable
  xal::LabelService service(cfg, name);
  httplib::Server server;
  service.mount(server);
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  if (!server.bind_to_port(host, port)) {
    throw xal::Error("cannot bind " + host + ":" + std::to_string(port));
  }
  std::cout << "serving on http://" << host << ":" << port << " (default config " << name << ")" << std::endl;
  server.listen_after_bind();
  return 0;
}

int cmd_emit(const std::string& kind, const std::string& in, const std::string& out) {
  const auto k = xal::report::parse_plot_kind(kind);
  const auto path = xal::report::emit_plot_data(k, in, out.empty() ? in : out);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_generate(const std::string& kind, std::uint64_t seed, std::size_t n_per_gaussian,
                 std::size_t rows, std::size_t features, std::size_t informative,
                 const std::string& out) {
  xal::TabularDataset data = [&] {
    if (kind == "toy") return xal::generate_toy(seed, n_per_gaussian);
    if (kind == "surrogate") return xal::generate_surrogate_highdim(seed, rows, features, informative);
    throw xal::ConfigError("generate: kind must be toy or surrogate");
  }();
  if (out.empty() || out == "-") {
    xal::write_dataset_csv(std::cout, data);
    return 0;
  }
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  std::ofstream f(out, std::ios::binary);
  if (!f) throw xal::Error("cannot write " + out);
  xal::write_dataset_csv(f, data);
  std::cerr << "wrote " << data.size() << " rows to " << out << "\n";
  return 0;
}

int cmd_presets() {
  for (const auto& p : xal::presets()) std::cout << p.name << "\t" << p.description << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable active learning experiments and labelling service"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment preset or config file");
  run_cmd->add_option("name", run.preset_pos, "Preset name (same as --preset)");
  run_cmd->add_option("--preset", run.preset, "Preset name");
  run_cmd->add_option("--config", run.config, "Config file");
  run_cmd->add_option("--seed", run.seed, "Override loop.seed");
  run_cmd->add_option("--steps", run.steps, "Override loop.steps");
  run_cmd->add_option("--runs", run.runs, "Override loop.n_runs");
  run_cmd->add_option("--out", run.out, "Output directory (default: the config's output)");
  run_cmd->add_option("--threads", run.threads, "Worker threads, 0 = all cores");

  std::string serve_preset, serve_config, host = "127.0.0.1";
  int port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Serve labelling sessions over HTTP");
  serve_cmd->add_option("--preset", serve_preset, "Default preset for new sessions");
  serve_cmd->add_option("--config", serve_config, "Default config file for new sessions");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));

  std::string emit_kind, emit_in, emit_out;
  auto* emit_cmd = app.add_subcommand("emit", "Write plot tables from run artifacts");
  emit_cmd->add_option("kind", emit_kind, "history | curves | scatter")->required();
  emit_cmd->add_option("--in", emit_in, "Run directory")->required();
  emit_cmd->add_option("--out", emit_out, "Output directory (default: the run directory)");

  std::string gen_kind = "toy", gen_out;
  std::uint64_t gen_seed = 7;
  std::size_t gen_npg = 400, gen_rows = 6114, gen_features = 274, gen_informative = 10;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  gen_cmd->add_option("kind", gen_kind, "toy | surrogate")->required();
  gen_cmd->add_option("--seed", gen_seed, "Generator seed");
  gen_cmd->add_option("--n-per-gaussian", gen_npg, "Toy points per Gaussian");
  gen_cmd->add_option("--rows", gen_rows, "Surrogate rows");
  gen_cmd->add_option("--features", gen_features, "Surrogate features");
  gen_cmd->add_option("--informative", gen_informative, "Surrogate informative features");
  gen_cmd->add_option("--out", gen_out, "Output CSV path, '-' for stdout");

  auto* presets_cmd = app.add_subcommand("presets", "List experiment presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (serve_cmd->parsed()) return cmd_serve(serve_preset, serve_config, host, port);
    if (emit_cmd->parsed()) return cmd_emit(emit_kind, emit_in, emit_out);
    if (gen_cmd->parsed()) {
      return cmd_generate(gen_kind, gen_seed, gen_npg, gen_rows, gen_features, gen_informative, gen_out);
    }
    if (presets_cmd->parsed()) return cmd_presets();
  } catch (const xal::ConfigError& e) {
    std::cerr << "xal: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "xal: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
