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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/regulator.hpp"
#include "cmgtraj/trajectory.hpp"

namespace cmgtraj {

/// Time-varying feedback u = u_bar + K_k (x_bar - x), one gain per sample.
struct ProjectionRegulator {
  std::vector<Eigen::MatrixXd> K;
};

/// Weights of the projection regulator: constant ambient weights that are
/// projected onto the tangent space at every sample.
struct RegulatorWeights {
  Eigen::MatrixXd Qc;  ///< ambient state weight
  Eigen::MatrixXd R;   ///< control weight
  Eigen::MatrixXd P_T; ///< terminal weight, projected at x(T)

  static RegulatorWeights from_design(const LqrWeights& w, const RegulatorDesign& d, int m);
};

/// Closed-loop rollout of the curve (x_bar, u_bar) from x0. Throws
/// NumericalError if any state entry exceeds state_bound in magnitude.
Trajectory project(const StepMap& map, const Trajectory& curve, const ProjectionRegulator& reg,
                   const Eigen::VectorXd& x0, double state_bound = 1e6);

enum class RiccatiForm {
  kDifferential,  ///< continuous Riccati equation integrated backward per interval
  kSampled,       ///< discrete recursion on the step linearizations
};

/// Finite-horizon regulator along a trajectory with the tangent-projected
/// weights. The cost-to-go and gains are restricted to the tangent space at
/// each sample. Throws NumericalError on Riccati blow-up.
ProjectionRegulator tv_regulator(const StepMap& map, const Trajectory& traj,
                                 const std::vector<StepLinearization>& steps,
                                 const RegulatorWeights& weights,
                                 RiccatiForm form = RiccatiForm::kDifferential,
                                 double blowup = 1e12);

/// Trapezoidal state cost plus control cost plus terminal cost on the grid.
double objective(const Trajectory& traj, const CostFunctional& cost);

enum class DescentOrder { kFirst, kSecond };

struct DescentDirection {
  Eigen::MatrixXd z;  ///< state perturbation, z(0) = 0
  Eigen::MatrixXd v;  ///< control perturbation
  double theta = 0.0; ///< directional derivative of the objective along (z, v)
  DescentOrder order = DescentOrder::kFirst;
  bool fallback = false;  ///< second order requested but not convex
};

/// Sensitivities of every step of the trajectory.
std::vector<StepLinearization> linearize_steps(const StepMap& map, const Trajectory& traj);

/// LQ subproblem over the linearized step maps. The second-order model takes
/// its costate through the closed loop formed with `reg`.
DescentDirection descent_direction(const StepMap& map, const Trajectory& traj,
                                   const std::vector<StepLinearization>& steps,
                                   const CostFunctional& cost, DescentOrder order,
                                   const ProjectionRegulator* reg = nullptr);

struct LineSearchConfig {
  double contraction = 0.5;
  double armijo = 0.4;
  double min_step = 1e-8;
};

struct LineSearchResult {
  double gamma = 0.0;
  double cost = 0.0;
  std::optional<Trajectory> trajectory;  ///< empty when no step was accepted
};

/// Backtracking from gamma = 1 with Armijo acceptance on the projected curve.
LineSearchResult line_search(const StepMap& map, const Trajectory& traj, double cost_now,
                             const DescentDirection& dir, const CostFunctional& cost,
                             const ProjectionRegulator& reg, const LineSearchConfig& config = {});

struct SolverConfig {
  int max_iters = 100;
  double theta_tol = 1e-6;
  bool second_order = true;
  double second_order_switch = 1e-3;
  RiccatiForm riccati = RiccatiForm::kDifferential;
  LineSearchConfig line_search;
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double theta = 0.0;
  double step = 0.0;
  DescentOrder order = DescentOrder::kFirst;
  bool fallback = false;
};

enum class Termination { kConverged, kMaxIterations, kStall };
std::string to_string(Termination t);

struct SolverReport {
  Trajectory trajectory;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double final_theta = 0.0;
  std::vector<IterationRecord> history;
  Termination termination = Termination::kMaxIterations;
  std::string message;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Projection-operator Newton iteration from a feasible guess.
SolverReport solve(const StepMap& map, const Eigen::VectorXd& x0, const CostFunctional& cost,
                   const Trajectory& guess, const RegulatorWeights& reg,
                   const SolverConfig& config = {}, const IterationCallback& on_iter = {});

struct ManeuverMetrics {
  double maneuver_cost = 0.0;    ///< objective value
  double control_effort = 0.0;   ///< N m s
  double maneuver_energy = 0.0;  ///< J
  double maneuver_time = 0.0;    ///< s
  double final_att_error = 0.0;  ///< deg
  double max_ug = 0.0;           ///< N m
  double max_uw = 0.0;           ///< N m
};

/// Table-style statistics of a maneuver. maneuver_time is the first grid time
/// after which the attitude error stays below settle_deg (T if never).
ManeuverMetrics metrics(const CmgDynamics& dyn, const Trajectory& traj,
                        const CostFunctional& cost, double settle_deg = 1.0);

}  // namespace cmgtraj
