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

#include <vector>

#include <Eigen/Dense>

#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/integrator.hpp"

namespace cmgtraj {

/// Uniform grid t_k = k dt, k = 0..N.
struct TimeGrid {
  double dt = 0.05;
  int intervals = 0;

  static TimeGrid over(double horizon, double dt);
  double time(int k) const { return k * dt; }
  double horizon() const { return intervals * dt; }
};

/// Sampled state and control curve.
///
/// Column k of x is x(t_k); column k of u is the control held constant on
/// [t_k, t_{k+1}). The last control column is the feedback value at t_N and
/// does not act on the dynamics.
class Trajectory {
 public:
  Trajectory(TimeGrid grid, Eigen::MatrixXd x, Eigen::MatrixXd u);

  const TimeGrid& grid() const { return grid_; }
  int intervals() const { return grid_.intervals; }
  double time(int k) const { return grid_.time(k); }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::MatrixXd& u() const { return u_; }
  Eigen::MatrixXd& x() { return x_; }
  Eigen::MatrixXd& u() { return u_; }

  /// Cubic Hermite interpolation with endpoint derivatives from f.
  Eigen::VectorXd state_at(const CmgDynamics& dyn, double t) const;
  Eigen::VectorXd control_at(double t) const;

 private:
  int interval_of(double t) const;

  TimeGrid grid_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd u_;
};

/// Sensitivities of one zero-order-hold step.
struct StepLinearization {
  Eigen::MatrixXd Phi_x;  ///< d x_{k+1} / d x_k
  Eigen::MatrixXd Phi_u;  ///< d x_{k+1} / d u_k
};

/// Exact discretization of the dynamics under piecewise-constant controls.
class StepMap {
 public:
  StepMap(const CmgDynamics& dyn, double dt, Tolerances tol = {});

  const CmgDynamics& dynamics() const { return dyn_; }
  double dt() const { return dt_; }
  const DormandPrince& integrator() const { return rk_; }

  /// State after holding u for one step from x.
  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  /// Step sensitivities from the variational equations.
  StepLinearization linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

 private:
  const CmgDynamics& dyn_;
  double dt_;
  DormandPrince rk_;
};

/// Open-loop rollout of the controls of `u` from x0.
Trajectory simulate(const StepMap& map, const Eigen::VectorXd& x0, const Eigen::MatrixXd& u);

/// Per-sample constraint residuals [|q| - 1; C(q) hbar - h0] (4 x (N+1)).
Eigen::MatrixXd constraint_residuals(const CmgDynamics& dyn, const Trajectory& traj,
                                     const Eigen::Vector3d& h0);

/// Largest relative deviation between stored samples and a re-integration
/// of each interval from the stored state.
double reintegration_defect(const StepMap& map, const Trajectory& traj);

}  // namespace cmgtraj
