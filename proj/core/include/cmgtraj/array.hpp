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

namespace cmgtraj {

/// Principal inertias (kg m^2) shared by every CMG of a homogeneous array.
struct CmgInertia {
  double gimbal = 0.115;
  double spin_wheel = 0.075;
  double spin_gimbal = 0.015;
  double transverse = 0.001;
};

/// Per-CMG diagonal inertia entries; each vector has one entry per CMG.
struct CmgInertiaDiagonals {
  Eigen::VectorXd gimbal;
  Eigen::VectorXd spin_wheel;
  Eigen::VectorXd spin_gimbal;
  Eigen::VectorXd transverse;

  static CmgInertiaDiagonals uniform(int m, const CmgInertia& inertia);
  /// Total spin-axis inertia, wheel plus gimbal frame.
  Eigen::VectorXd spin() const { return spin_wheel + spin_gimbal; }
};

/// Mounting geometry and inertias of an m-CMG array.
///
/// Column i of the axis matrices is the (gimbal, spin, transverse) triad of
/// CMG i at zero gimbal angle, written in the body frame. The triad is right
/// handed with transverse = spin x gimbal.
class ArrayGeometry {
 public:
  static constexpr double kTriadTolerance = 1e-12;

  ArrayGeometry(Eigen::Matrix3Xd gimbal_axes, Eigen::Matrix3Xd spin_axes0,
                CmgInertiaDiagonals inertia);

  int size() const { return static_cast<int>(gimbal_axes_.cols()); }
  const Eigen::Matrix3Xd& gimbal_axes() const { return gimbal_axes_; }
  const Eigen::Matrix3Xd& spin_axes0() const { return spin_axes0_; }
  const Eigen::Matrix3Xd& transverse_axes0() const { return transverse_axes0_; }
  const CmgInertiaDiagonals& inertia() const { return inertia_; }

  /// CMG mounting positions relative to the center of mass (m); zero by default.
  const Eigen::Matrix3Xd& positions() const { return positions_; }
  const Eigen::VectorXd& masses() const { return masses_; }
  ArrayGeometry with_mounting(Eigen::Matrix3Xd positions, Eigen::VectorXd masses) const;
  ArrayGeometry with_inertia(CmgInertiaDiagonals inertia) const;

 private:
  void validate() const;

  Eigen::Matrix3Xd gimbal_axes_;
  Eigen::Matrix3Xd spin_axes0_;
  Eigen::Matrix3Xd transverse_axes0_;
  CmgInertiaDiagonals inertia_;
  Eigen::Matrix3Xd positions_;
  Eigen::VectorXd masses_;
};

/// Two roof faces of m/2 CMGs each, tilted by +-beta about the body y axis.
/// CMGs 1..m/2 have gimbal axis [sin b; 0; cos b], the rest [-sin b; 0; cos b];
/// every default spin axis is +y. Throws for odd m or m < 4.
ArrayGeometry rooftop(int m, double beta, const CmgInertia& inertia = {});

/// Four CMGs on the faces of a square pyramid with face inclination beta.
/// Default transverse axes are tangent to the base circle so that all
/// default output torques lie in the body xy plane.
ArrayGeometry pyramid(double beta, const CmgInertia& inertia = {});

/// Body inertia plus array: holds the constant combined inertia J.
class SatelliteParams {
 public:
  SatelliteParams(Eigen::Matrix3d body_inertia, ArrayGeometry geometry);

  const Eigen::Matrix3d& body_inertia() const { return body_inertia_; }
  const ArrayGeometry& geometry() const { return geometry_; }
  /// J_B plus parallel-axis contributions of the CMG masses.
  const Eigen::Matrix3d& inertia() const { return inertia_; }
  int cmg_count() const { return geometry_.size(); }

 private:
  Eigen::Matrix3d body_inertia_;
  ArrayGeometry geometry_;
  Eigen::Matrix3d inertia_;
};

/// Spin and transverse axes at gimbal angles delta.
struct FrameMatrices {
  Eigen::Matrix3Xd spin;
  Eigen::Matrix3Xd transverse;
};

FrameMatrices frame_matrices(const ArrayGeometry& geom, const Eigen::VectorXd& delta);

/// J + A_g Jg A_g^T + A_s Js A_s^T + A_t Jt A_t^T.
Eigen::Matrix3d inertia_jstg(const SatelliteParams& sat, const Eigen::VectorXd& delta);
/// J + A_s Js A_s^T + A_t Jt A_t^T.
Eigen::Matrix3d inertia_jst(const SatelliteParams& sat, const Eigen::VectorXd& delta);
/// J + A_s Jsg A_s^T + A_t Jt A_t^T (wheel spin inertia removed).
Eigen::Matrix3d inertia_jsta(const SatelliteParams& sat, const Eigen::VectorXd& delta);

/// Body-frame total angular momentum.
Eigen::Vector3d hbar(const SatelliteParams& sat, const Eigen::Vector3d& omega,
                     const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swr,
                     const Eigen::VectorXd& h_ga);
/// Body rate that produces momentum h; inverse of hbar in omega.
Eigen::Vector3d wbar(const SatelliteParams& sat, const Eigen::Vector3d& h,
                     const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swr,
                     const Eigen::VectorXd& h_ga);

/// dhbar/ddelta with relative wheel momenta.
Eigen::Matrix3Xd jacobian_D(const ArrayGeometry& geom, const Eigen::Vector3d& omega,
                            const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swr);
/// Actuator Jacobian with the wheel inertia moved into absolute wheel momenta h_swa.
Eigen::Matrix3Xd jacobian_Da(const ArrayGeometry& geom, const Eigen::Vector3d& omega,
                             const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swa);

/// Absolute wheel momenta h_swr + Jsw A_s^T omega.
Eigen::VectorXd absolute_wheel_momentum(const ArrayGeometry& geom, const Eigen::Vector3d& omega,
                                        const Eigen::VectorXd& delta,
                                        const Eigen::VectorXd& h_swr);

/// Smallest singular value of A_t(delta); zero at gimbal-only singularities.
double singularity_measure(const ArrayGeometry& geom, const Eigen::VectorXd& delta);

}  // namespace cmgtraj
