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

#include <Eigen/Dense>

#include "cmgtraj/array.hpp"
#include "cmgtraj/quat.hpp"

namespace cmgtraj {

/// Index map of the (3m+7)-vector [q; h_swr; omega; delta; h_ga] and the
/// 2m-vector [u_g; u_w].
struct StateLayout {
  int m = 0;

  Eigen::Index dim() const { return 3 * m + 7; }
  Eigen::Index control_dim() const { return 2 * m; }
  /// Dimension of the constraint manifold X(h0).
  Eigen::Index tangent_dim() const { return 3 * m + 3; }

  static constexpr Eigen::Index q() { return 0; }
  Eigen::Index h_swr() const { return 4; }
  Eigen::Index omega() const { return 4 + m; }
  Eigen::Index delta() const { return 7 + m; }
  Eigen::Index h_ga() const { return 7 + 2 * m; }

  Eigen::Index u_g() const { return 0; }
  Eigen::Index u_w() const { return m; }
};

/// Spacecraft state. The quaternion block is stored raw: its unit norm is a
/// monitored invariant of the dynamics, not something the type enforces.
class State {
 public:
  explicit State(int m);
  State(int m, Eigen::VectorXd x);

  /// Rest state (omega = 0, h_ga = 0) at attitude q, gimbal angles delta and
  /// relative wheel momenta h_swr.
  static State rest(const UnitQuaternion& q, const Eigen::VectorXd& delta,
                    const Eigen::VectorXd& h_swr);

  int cmg_count() const { return layout_.m; }
  const StateLayout& layout() const { return layout_; }
  const Eigen::VectorXd& vec() const { return x_; }
  Eigen::VectorXd& vec() { return x_; }

  Eigen::Vector4d q() const { return x_.segment<4>(0); }
  Eigen::VectorXd h_swr() const { return x_.segment(layout_.h_swr(), layout_.m); }
  Eigen::Vector3d omega() const { return x_.segment<3>(layout_.omega()); }
  Eigen::VectorXd delta() const { return x_.segment(layout_.delta(), layout_.m); }
  Eigen::VectorXd h_ga() const { return x_.segment(layout_.h_ga(), layout_.m); }

  /// Attitude normalized for use where a rotation is required.
  UnitQuaternion attitude() const;

 private:
  StateLayout layout_;
  Eigen::VectorXd x_;
};

/// Gimbal and wheel motor torques [u_g; u_w] (N m).
class Control {
 public:
  explicit Control(int m) : m_(m), u_(Eigen::VectorXd::Zero(2 * m)) {}
  Control(int m, Eigen::VectorXd u);

  const Eigen::VectorXd& vec() const { return u_; }
  Eigen::VectorXd& vec() { return u_; }
  Eigen::VectorXd u_g() const { return u_.head(m_); }
  Eigen::VectorXd u_w() const { return u_.tail(m_); }

 private:
  int m_;
  Eigen::VectorXd u_;
};

struct LinearizedDynamics {
  Eigen::MatrixXd A;  ///< df/dx
  Eigen::MatrixXd B;  ///< df/du
};

/// Rows: orthonormal basis of the tangent space of X(h0) at a state.
struct TangentBasis {
  Eigen::MatrixXd M;
};

struct ReducedDynamics {
  Eigen::MatrixXd A;  ///< M A M^T
  Eigen::MatrixXd B;  ///< M B
};

struct ConstraintResidual {
  double norm;               ///< |q| - 1
  Eigen::Vector3d momentum;  ///< C(q) hbar(x) - h0
};

enum class JacobianMode { kAnalytic, kFiniteDifference };

/// Momentum-conserving dynamics of a CMG-actuated rigid spacecraft.
///
/// Every function is pure; a CmgDynamics object may be shared across threads.
class CmgDynamics {
 public:
  explicit CmgDynamics(SatelliteParams sat);

  const SatelliteParams& params() const { return sat_; }
  const StateLayout& layout() const { return layout_; }
  int cmg_count() const { return layout_.m; }

  /// State derivative for raw state/control vectors and external torque tau_e.
  Eigen::VectorXd f(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    const Eigen::Vector3d& tau_e = Eigen::Vector3d::Zero()) const;
  Eigen::VectorXd f(const State& x, const Control& u,
                    const Eigen::Vector3d& tau_e = Eigen::Vector3d::Zero()) const {
    return f(x.vec(), u.vec(), tau_e);
  }

  /// Jacobian [df/dx, df/du] (n x (n + 2m)).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           const Eigen::Vector3d& tau_e = Eigen::Vector3d::Zero()) const;
  /// Central-difference Jacobian; the independent oracle for jacobian().
  Eigen::MatrixXd jacobian_fd(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                              double step = 1e-6,
                              const Eigen::Vector3d& tau_e = Eigen::Vector3d::Zero()) const;

  LinearizedDynamics linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               JacobianMode mode = JacobianMode::kAnalytic) const;
  LinearizedDynamics linearize(const State& x, const Control& u,
                               JacobianMode mode = JacobianMode::kAnalytic) const {
    return linearize(x.vec(), u.vec(), mode);
  }

  /// Body-frame total angular momentum of a state.
  Eigen::Vector3d momentum(const Eigen::VectorXd& x) const;

  ConstraintResidual constraints(const Eigen::VectorXd& x, const Eigen::Vector3d& h0) const;
  ConstraintResidual constraints(const State& x, const Eigen::Vector3d& h0) const {
    return constraints(x.vec(), h0);
  }

  /// 4 x n constraint Jacobian: the unit-norm gradient and the body-frame
  /// gradient of the inertial momentum.
  Eigen::MatrixXd constraint_jacobian(const Eigen::VectorXd& x) const;

  /// Orthonormal complement of rowspace(Z(x)); throws NumericalError if Z is
  /// rank deficient.
  TangentBasis tangent_basis(const Eigen::VectorXd& x) const;

  /// Orthogonal projector onto the tangent space, M^T M (basis independent).
  Eigen::MatrixXd tangent_projector(const Eigen::VectorXd& x) const;

 private:
  SatelliteParams sat_;
  StateLayout layout_;
};

ReducedDynamics reduce(const LinearizedDynamics& lin, const TangentBasis& basis);

/// Gimbal angles with zero net spin momentum, h_target * A_s(delta) * 1 = 0 to
/// 1e-10, and singularity measure >= min_singularity. Deterministic in seed.
/// Throws NumericalError after max_attempts random restarts.
Eigen::VectorXd find_zero_momentum_config(const SatelliteParams& sat, double h_swr_target,
                                          std::uint64_t seed, double min_singularity = 0.1,
                                          int max_attempts = 200);

}  // namespace cmgtraj
