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

#include <Eigen/Dense>

#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/quat.hpp"
#include "cmgtraj/trajectory.hpp"

namespace cmgtraj {

/// Gains of the singularity-robust baseline controller.
struct SrParams {
  double lambda0 = 0.01;   ///< base regularization
  double sigma_ref = 2.5;  ///< singularity-measure scale of the regularization schedule
  double k_p = 0.01;       ///< attitude gain (1/s^2)
  double k_d = 0.12;       ///< rate gain (1/s)
  double k_delta = 10.0;   ///< gimbal-rate servo gain (1/s)
  double k_w = 1.0;        ///< wheel-momentum hold gain (1/s)
  double tau_max = 3.0;    ///< command torque saturation (N m)
  double rate_max = 1.0;   ///< gimbal rate limit (rad/s)

  /// sigma_ref defaulted to a tenth of the median wheel momentum target.
  static SrParams for_wheel_momentum(const Eigen::VectorXd& h_swr_target);
  void validate() const;
};

/// Saturated PD body-torque command toward q_d.
Eigen::Vector3d torque_command(const UnitQuaternion& q, const Eigen::Vector3d& omega,
                               const UnitQuaternion& q_d, const Eigen::Matrix3d& inertia,
                               const SrParams& params);

/// Regularized minimum-norm gimbal rates with D rates = tau_r, clamped to rate_max.
Eigen::VectorXd sr_gimbal_rates(const Eigen::Matrix3Xd& D, const Eigen::Vector3d& tau_r,
                                const SrParams& params);

/// Motor torques that servo the gimbal rates to rates_cmd and hold the
/// relative wheel momenta at h_swr_target.
Control inner_loop(const CmgDynamics& dyn, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& rates_cmd, const Eigen::VectorXd& h_swr_target,
                   const SrParams& params);

/// Full control law: attitude PD -> SR inverse -> inner servo.
Control sr_control(const CmgDynamics& dyn, const Eigen::VectorXd& x, const UnitQuaternion& q_d,
                   const Eigen::VectorXd& h_swr_target, const SrParams& params);

/// Closed-loop rollout of sr_control sampled and held on the map's grid.
/// Throws NumericalError if the attitude error grows over the second half.
Trajectory generate_guess(const StepMap& map, const Eigen::VectorXd& x0,
                          const UnitQuaternion& q_d, const Eigen::VectorXd& h_swr_target,
                          int intervals, const SrParams& params);

}  // namespace cmgtraj
