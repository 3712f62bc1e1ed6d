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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/opt.hpp"
#include "cmgtraj/regulator.hpp"
#include "cmgtraj/trajectory.hpp"
#include "cmgtraj_harness/config.hpp"

namespace cmgtraj::harness {

/// Stored trajectory failed re-integration or constraint checks.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Solver stopped without progress.
class StallError : public Error {
 public:
  using Error::Error;
};

/// Everything derived from a config before any trajectory exists: the
/// platform, the step map, the rest states at both ends and the LQR design.
/// Holds references into itself, so it is pinned in memory.
class Scenario {
 public:
  explicit Scenario(ScenarioConfig cfg);
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;

  const ScenarioConfig& config() const { return cfg_; }
  const CmgDynamics& dynamics() const { return dyn_; }
  const StepMap& map() const { return map_; }
  const Eigen::VectorXd& delta0() const { return delta0_; }
  const Eigen::VectorXd& x0() const { return x0_; }
  const Eigen::VectorXd& x_d() const { return x_d_; }
  const RegulatorDesign& design() const { return design_; }
  RegulatorWeights weights() const;

 private:
  ScenarioConfig cfg_;
  CmgDynamics dyn_;
  StepMap map_;
  Eigen::VectorXd delta0_;
  Eigen::VectorXd x0_;
  Eigen::VectorXd x_d_;
  RegulatorDesign design_;
};

struct RunMetrics {
  ManeuverMetrics table;
  double peak_body_rate = 0.0;  ///< max |omega_i| over the run (rad/s)
};

RunMetrics run_metrics(const Scenario& s, const Trajectory& traj);
nlohmann::json to_json(const RunMetrics& m);

struct GuessOutcome {
  Trajectory trajectory;
  RunMetrics metrics;
};

GuessOutcome run_guess(const Scenario& s);

struct SolveOutcome {
  GuessOutcome guess;
  SolverReport solver;
  RunMetrics metrics;
  /// Deterministic: no wall-clock values.
  nlohmann::json report;
};

/// guess -> design -> solve -> metrics. max_iters overrides the config.
SolveOutcome run_solve(const Scenario& s, std::optional<int> max_iters = {},
                       const IterationCallback& on_iter = {});

/// Residual bounds applied by run_check.
struct CheckBounds {
  double defect = 1e-7;
  double norm = 1e-9;
  double momentum = 1e-6;  ///< scaled by 1 + h_swr target
  double metrics = 1e-9;   ///< relative, against a report
};

struct CheckOutcome {
  nlohmann::json report;
  bool passed = false;
};

/// Re-integrates a trajectory file step by step, recomputes the constraint
/// residuals and metrics, and compares them with a run report if given.
CheckOutcome run_check(const std::filesystem::path& trajectory,
                       const std::optional<std::filesystem::path>& report = {},
                       const CheckBounds& bounds = {});

/// Relative spread of gimbal excursions between the roof pairs (1,3) and
/// (2,4): rms(d1 - s d3) / rms(d1) with the sign s that fits best, worse of
/// the two pairs. Only meaningful for m = 4.
double gimbal_pairing(const CmgDynamics& dyn, const Trajectory& traj);

using BatchProgress = std::function<void(const std::string&)>;

/// n random rest-to-rest transfers from one seed, run on every geometry in
/// cfgs. Failures are recorded per maneuver. The result is deterministic.
nlohmann::json run_batch(const std::vector<ScenarioConfig>& cfgs, int n, std::uint64_t seed,
                         std::optional<int> max_iters = {}, const BatchProgress& progress = {});

}  // namespace cmgtraj::harness
