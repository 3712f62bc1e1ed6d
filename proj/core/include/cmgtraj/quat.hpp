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

namespace cmgtraj {

/// Hamilton quaternion stored scalar-first as [s; x; y; z].
///
/// Arithmetic never renormalizes; use UnitQuaternion where a unit norm is a
/// precondition.
class Quaternion {
 public:
  Quaternion() : q_(Eigen::Vector4d::Zero()) {}
  Quaternion(double s, const Eigen::Vector3d& v) { q_ << s, v; }
  explicit Quaternion(const Eigen::Vector4d& q) : q_(q) {}

  static Quaternion identity() { return Quaternion(1.0, Eigen::Vector3d::Zero()); }

  double s() const { return q_(0); }
  Eigen::Vector3d v() const { return q_.tail<3>(); }
  const Eigen::Vector4d& vec() const { return q_; }

  Quaternion operator-() const { return Quaternion(Eigen::Vector4d(-q_)); }

 private:
  Eigen::Vector4d q_;
};

/// Quaternion whose norm is within kUnitTolerance of one.
class UnitQuaternion {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  /// Throws InvalidArgument when | |q| - 1 | > kUnitTolerance.
  explicit UnitQuaternion(const Quaternion& q);
  explicit UnitQuaternion(const Eigen::Vector4d& q) : UnitQuaternion(Quaternion(q)) {}

  static UnitQuaternion identity() { return UnitQuaternion(Quaternion::identity()); }
  /// Divides by the norm; throws on a (near) zero quaternion.
  static UnitQuaternion normalized(const Quaternion& q);
  /// Rotation by `angle` radians about `axis` (normalized internally).
  static UnitQuaternion from_axis_angle(const Eigen::Vector3d& axis, double angle);

  const Quaternion& quat() const { return q_; }
  const Eigen::Vector4d& vec() const { return q_.vec(); }
  double s() const { return q_.s(); }
  Eigen::Vector3d v() const { return q_.v(); }

  UnitQuaternion operator-() const { return UnitQuaternion(-q_, 0); }

 private:
  UnitQuaternion(const Quaternion& q, int /*unchecked*/) : q_(q) {}
  Quaternion q_;
};

/// Proper orthogonal 3x3 matrix; construction verifies orthogonality and det = +1.
class RotationMatrix {
 public:
  static constexpr double kTolerance = 1e-12;

  explicit RotationMatrix(const Eigen::Matrix3d& c);

  const Eigen::Matrix3d& matrix() const { return c_; }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return c_ * v; }
  RotationMatrix operator*(const RotationMatrix& other) const;

 private:
  struct Unchecked {};
  RotationMatrix(const Eigen::Matrix3d& c, Unchecked) : c_(c) {}
  Eigen::Matrix3d c_;
};

Quaternion qprod(const Quaternion& q, const Quaternion& p);
inline Quaternion operator*(const Quaternion& q, const Quaternion& p) { return qprod(q, p); }

/// O_L(q): qprod(q, p) == left_matrix(q) * p.
Eigen::Matrix4d left_matrix(const Quaternion& q);
/// O_R(p): qprod(q, p) == right_matrix(p) * q.
Eigen::Matrix4d right_matrix(const Quaternion& p);

/// Cross-product matrix: hat(w) * v == w.cross(v).
Eigen::Matrix3d hat(const Eigen::Vector3d& w);

Quaternion conj(const Quaternion& q);
double norm(const Quaternion& q);

/// Embeds a 3-vector as a quaternion with zero scalar part.
Quaternion pure(const Eigen::Vector3d& v);

/// Body-to-inertial rotation matrix of a unit quaternion.
RotationMatrix rotm(const UnitQuaternion& q);

/// The same polynomial as rotm() evaluated on an arbitrary 4-vector, without
/// any norm check. Used where the state quaternion is monitored, not enforced.
Eigen::Matrix3d rotation_polynomial(const Eigen::Vector4d& q);

/// Geodesic angle (radians) between two attitudes; q and -q are the same attitude.
double attitude_error(const UnitQuaternion& q, const UnitQuaternion& q_d);

}  // namespace cmgtraj
