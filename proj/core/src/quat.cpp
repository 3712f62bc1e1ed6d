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

#include "cmgtraj/quat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cmgtraj/errors.hpp"

namespace cmgtraj {

UnitQuaternion::UnitQuaternion(const Quaternion& q) : q_(q) {
  const double n = norm(q);
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    std::ostringstream os;
    os << "UnitQuaternion: norm " << n << " deviates from 1 by more than " << kUnitTolerance;
    throw InvalidArgument(os.str());
  }
}

UnitQuaternion UnitQuaternion::normalized(const Quaternion& q) {
  const double n = norm(q);
  if (!(n > 1e-12)) throw InvalidArgument("UnitQuaternion::normalized: zero quaternion");
  return UnitQuaternion(Quaternion(Eigen::Vector4d(q.vec() / n)), 0);
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw InvalidArgument("UnitQuaternion::from_axis_angle: zero axis");
  return normalized(Quaternion(std::cos(0.5 * angle), std::sin(0.5 * angle) * axis / n));
}

RotationMatrix::RotationMatrix(const Eigen::Matrix3d& c) : c_(c) {
  const double ortho = (c.transpose() * c - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = c.determinant();
  if (!(ortho <= kTolerance) || !(std::abs(det - 1.0) <= kTolerance)) {
    std::ostringstream os;
    os << "RotationMatrix: not a proper rotation (orthogonality defect " << ortho
       << ", det " << det << ")";
    throw InvalidArgument(os.str());
  }
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const {
  return RotationMatrix(Eigen::Matrix3d(c_ * other.c_), Unchecked{});
}

Quaternion qprod(const Quaternion& q, const Quaternion& p) {
  const Eigen::Vector3d qv = q.v();
  const Eigen::Vector3d pv = p.v();
  return Quaternion(q.s() * p.s() - qv.dot(pv), q.s() * pv + p.s() * qv + qv.cross(pv));
}

Eigen::Matrix4d left_matrix(const Quaternion& q) {
  Eigen::Matrix4d o;
  o(0, 0) = q.s();
  o.block<1, 3>(0, 1) = -q.v().transpose();
  o.block<3, 1>(1, 0) = q.v();
  o.block<3, 3>(1, 1) = q.s() * Eigen::Matrix3d::Identity() + hat(q.v());
  return o;
}

Eigen::Matrix4d right_matrix(const Quaternion& p) {
  Eigen::Matrix4d o;
  o(0, 0) = p.s();
  o.block<1, 3>(0, 1) = -p.v().transpose();
  o.block<3, 1>(1, 0) = p.v();
  o.block<3, 3>(1, 1) = p.s() * Eigen::Matrix3d::Identity() - hat(p.v());
  return o;
}

Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
  Eigen::Matrix3d h;
  h << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return h;
}

Quaternion conj(const Quaternion& q) { return Quaternion(q.s(), -q.v()); }

double norm(const Quaternion& q) { return q.vec().norm(); }

Quaternion pure(const Eigen::Vector3d& v) { return Quaternion(0.0, v); }

Eigen::Matrix3d rotation_polynomial(const Eigen::Vector4d& q) {
  const double s = q(0);
  const Eigen::Vector3d v = q.tail<3>();
  const Eigen::Matrix3d vh = hat(v);
  return s * s * Eigen::Matrix3d::Identity() + 2.0 * s * vh + v * v.transpose() + vh * vh;
}

RotationMatrix rotm(const UnitQuaternion& q) {
  // The 1e-9 norm slack of UnitQuaternion would violate the 1e-12 rotation
  // tolerance, so evaluate on the exactly normalized vector.
  const Eigen::Vector4d u = q.vec().normalized();
  return RotationMatrix(rotation_polynomial(u));
}

double attitude_error(const UnitQuaternion& q, const UnitQuaternion& q_d) {
  const double c = std::min(1.0, std::abs(q.vec().dot(q_d.vec())));
  return 2.0 * std::acos(c);
}

}  // namespace cmgtraj
