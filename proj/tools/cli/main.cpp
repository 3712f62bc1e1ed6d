/*
 Copyright 2026 The cmgtraj Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// cmgtraj: command-line front end for the trajectory pipeline.
//
//   cmgtraj guess    --config s.ini --out-dir out
//   cmgtraj solve    --config s.ini --out-dir out [--max-iters N]
//   cmgtraj check    out/optimal.csv [--report out/report.json]
//   cmgtraj batch    --config a.ini [--config b.ini] --n 10 --seed 7 --out-dir out
//   cmgtraj plotdata out/optimal.csv --out-dir plots
//
// Exit codes: 0 ok, 1 other failure, 2 config error, 3 solver stall,
// 4 validation failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmgtraj_harness/config.hpp"
#include "cmgtraj_harness/io.hpp"
#include "cmgtraj_harness/runs.hpp"

namespace fs = std::filesystem;
using namespace cmgtraj;
using namespace cmgtraj::harness;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kStall = 3, kValidation = 4 };

struct Options {
  std::vector<std::string> configs;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
  bool quiet = false;
  int n = 10;
  std::string input;
  std::string report;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ScenarioConfig load(const Options& o) {
  if (o.configs.size() != 1) throw ConfigError("exactly one --config is required");
  ScenarioConfig cfg = load_config(o.configs.front());
  if (o.seed) cfg.seed = *o.seed;
  if (!o.quiet) {
    for (const std::string& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  }
  return cfg;
}

void say(const Options& o, const std::string& text) {
  if (!o.quiet) std::cerr << text << "\n";
}

int cmd_guess(const Options& o) {
  const Clock clock;
  const Scenario s(load(o));
  const GuessOutcome g = run_guess(s);
  const fs::path dir = o.out_dir;
  write_trajectory(dir / "guess.csv", s.config(), "guess", s.dynamics(), g.trajectory);
  write_json(dir / "guess_report.json", {{"config", to_json(s.config())},
                                         {"config_hash", config_hash(s.config())},
                                         {"warnings", s.config().warnings},
                                         {"x0_hash", state_hash(s.x0())},
                                         {"guess", to_json(g.metrics)}});
  write_json(dir / "timing.json", {{"guess_seconds", clock.seconds()}});
  say(o, "guess: cost " + std::to_string(g.metrics.table.maneuver_cost) + ", wrote " +
             (dir / "guess.csv").string());
  return kOk;
}

int cmd_solve(const Options& o) {
  const Clock clock;
  const Scenario s(load(o));
  const SolveOutcome r = run_solve(s, o.max_iters, [&](const IterationRecord& it) {
    if (o.quiet) return;
    std::fprintf(stderr, "iter %3d  cost %.8g  theta %.3e  step %.3g  %s%s\n", it.iteration, it.cost,
                 it.theta, it.step, it.order == DescentOrder::kSecond ? "second" : "first",
                 it.fallback ? " (fallback)" : "");
  });
  const fs::path dir = o.out_dir;
  write_trajectory(dir / "guess.csv", s.config(), "guess", s.dynamics(), r.guess.trajectory);
  write_trajectory(dir / "optimal.csv", s.config(), "optimal", s.dynamics(), r.solver.trajectory);
  write_json(dir / "report.json", r.report);
  write_json(dir / "timing.json", {{"solve_seconds", clock.seconds()}});
  say(o, "solve: " + to_string(r.solver.termination) + ", cost " +
             std::to_string(r.solver.initial_cost) + " -> " + std::to_string(r.solver.final_cost));
  if (r.solver.termination == Termination::kStall) throw StallError(r.solver.message);
  return kOk;
}

int cmd_check(const Options& o) {
  std::optional<fs::path> report;
  if (!o.report.empty()) report = o.report;
  const CheckOutcome c = run_check(o.input, report);
  std::cout << c.report.dump(2) << "\n";
  if (!c.passed) throw ValidationError(o.input + ": check failed");
  return kOk;
}

int cmd_batch(const Options& o) {
  const Clock clock;
  if (o.configs.empty()) throw ConfigError("at least one --config is required");
  std::vector<ScenarioConfig> cfgs;
  for (const std::string& path : o.configs) cfgs.push_back(load_config(path));
  const std::uint64_t seed = o.seed.value_or(cfgs.front().seed);
  const nlohmann::json rep = run_batch(cfgs, o.n, seed, o.max_iters, [&](const std::string& m) { say(o, m); });
  const fs::path dir = o.out_dir;
  write_json(dir / "batch_report.json", rep);
  write_json(dir / "timing.json", {{"batch_seconds", clock.seconds()}});
  say(o, "batch: wrote " + (dir / "batch_report.json").string());
  return kOk;
}

int cmd_plotdata(const Options& o) {
  const TrajectoryFile f = read_trajectory(o.input);
  for (const fs::path& p : emit_plotdata(f, o.out_dir)) say(o, "wrote " + p.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMG spacecraft trajectory optimization"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", o.configs, "Scenario INI file")->required();
    sub->add_option("--out-dir", o.out_dir, "Output directory");
    sub->add_flag("--quiet", o.quiet, "Suppress progress output");
  };

  CLI::App* guess = app.add_subcommand("guess", "Roll out the singularity-robust baseline");
  common(guess, true);
  guess->add_option("--seed", o.seed, "Override the run seed");

  CLI::App* solve = app.add_subcommand("solve", "Guess, design and optimize");
  common(solve, true);
  solve->add_option("--seed", o.seed, "Override the run seed");
  solve->add_option("--max-iters", o.max_iters, "Override solver.max_iters");

  CLI::App* check = app.add_subcommand("check", "Re-integrate and validate a trajectory file");
  check->add_option("trajectory", o.input, "Trajectory CSV")->required();
  check->add_option("--report", o.report, "Run report to compare metrics against");
  check->add_flag("--quiet", o.quiet, "Suppress progress output");

  CLI::App* batch = app.add_subcommand("batch", "Random rest-to-rest transfers");
  common(batch, true);
  batch->add_option("--n", o.n, "Number of maneuvers")->check(CLI::PositiveNumber);
  batch->add_option("--seed", o.seed, "Batch seed (default: first config's run.seed)");
  batch->add_option("--max-iters", o.max_iters, "Override solver.max_iters");

  CLI::App* plot = app.add_subcommand("plotdata", "Write per-panel column files");
  plot->add_option("trajectory", o.input, "Trajectory CSV")->required();
  common(plot, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*guess) return cmd_guess(o);
    if (*solve) return cmd_solve(o);
    if (*check) return cmd_check(o);
    if (*batch) return cmd_batch(o);
    if (*plot) return cmd_plotdata(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const StallError& e) {
    std::cerr << "solver stalled: " << e.what() << "\n";
    return kStall;
  } catch (const ValidationError& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
