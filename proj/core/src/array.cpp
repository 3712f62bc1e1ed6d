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

#include "cmgtraj/array.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cmgtraj/errors.hpp"

namespace cmgtraj {

CmgInertiaDiagonals CmgInertiaDiagonals::uniform(int m, const CmgInertia& inertia) {
  return {Eigen::VectorXd::Constant(m, inertia.gimbal),
          Eigen::VectorXd::Constant(m, inertia.spin_wheel),
          Eigen::VectorXd::Constant(m, inertia.spin_gimbal),
          Eigen::VectorXd::Constant(m, inertia.transverse)};
}

ArrayGeometry::ArrayGeometry(Eigen::Matrix3Xd gimbal_axes, Eigen::Matrix3Xd spin_axes0,
                             CmgInertiaDiagonals inertia)
    : gimbal_axes_(std::move(gimbal_axes)),
      spin_axes0_(std::move(spin_axes0)),
      inertia_(std::move(inertia)) {
  const Eigen::Index m = gimbal_axes_.cols();
  if (m < 1 || spin_axes0_.cols() != m) {
    throw InvalidArgument("ArrayGeometry: axis matrices must have the same positive column count");
  }
  transverse_axes0_.resize(3, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    transverse_axes0_.col(i) = spin_axes0_.col(i).cross(gimbal_axes_.col(i));
  }
  positions_ = Eigen::Matrix3Xd::Zero(3, m);
  masses_ = Eigen::VectorXd::Zero(m);
  validate();
}

void ArrayGeometry::validate() const {
  const Eigen::Index m = gimbal_axes_.cols();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double eg = std::abs(gimbal_axes_.col(i).norm() - 1.0);
    const double es = std::abs(spin_axes0_.col(i).norm() - 1.0);
    const double et = std::abs(transverse_axes0_.col(i).norm() - 1.0);
    const double orth = std::abs(gimbal_axes_.col(i).dot(spin_axes0_.col(i)));
    if (eg > kTriadTolerance || es > kTriadTolerance || et > kTriadTolerance ||
        orth > kTriadTolerance) {
      std::ostringstream os;
      os << "ArrayGeometry: CMG " << i + 1 << " does not have an orthonormal axis triad";
      throw InvalidArgument(os.str());
    }
  }
  const auto check = [m](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != m || !(v.array() > 0.0).all()) {
      std::ostringstream os;
      os << "ArrayGeometry: inertia '" << name << "' must have " << m << " positive entries";
      throw InvalidArgument(os.str());
    }
  };
  check(inertia_.gimbal, "gimbal");
  check(inertia_.spin_wheel, "spin_wheel");
  check(inertia_.spin_gimbal, "spin_gimbal");
  check(inertia_.transverse, "transverse");
  if (positions_.cols() != m || masses_.size() != m || (masses_.array() < 0.0).any()) {
    throw InvalidArgument("ArrayGeometry: mounting data must have one entry per CMG, masses >= 0");
  }
}

ArrayGeometry ArrayGeometry::with_mounting(Eigen::Matrix3Xd positions,
                                           Eigen::VectorXd masses) const {
  ArrayGeometry g = *this;
  g.positions_ = std::move(positions);
  g.masses_ = std::move(masses);
  g.validate();
  return g;
}

ArrayGeometry ArrayGeometry::with_inertia(CmgInertiaDiagonals inertia) const {
  ArrayGeometry g = *this;
  g.inertia_ = std::move(inertia);
  g.validate();
  return g;
}

ArrayGeometry rooftop(int m, double beta, const CmgInertia& inertia) {
  if (m < 4 || m % 2 != 0) {
    std::ostringstream os;
    os << "rooftop: CMG count must be even and >= 4 (got " << m << ")";
    throw InvalidArgument(os.str());
  }
  Eigen::Matrix3Xd g(3, m);
  Eigen::Matrix3Xd s(3, m);
  for (int i = 0; i < m; ++i) {
    const double side = i < m / 2 ? 1.0 : -1.0;
    g.col(i) << side * std::sin(beta), 0.0, std::cos(beta);
    s.col(i) << 0.0, 1.0, 0.0;
  }
  return ArrayGeometry(g, s, CmgInertiaDiagonals::uniform(m, inertia));
}

ArrayGeometry pyramid(double beta, const CmgInertia& inertia) {
  if (!(beta > 0.0 && beta < std::numbers::pi / 2)) {
    throw InvalidArgument("pyramid: inclination must lie in (0, pi/2)");
  }
  Eigen::Matrix3Xd g(3, 4);
  Eigen::Matrix3Xd s(3, 4);
  for (int i = 0; i < 4; ++i) {
    const double phi = i * std::numbers::pi / 2;
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    g.col(i) << std::sin(beta) * cp, std::sin(beta) * sp, std::cos(beta);
    // spin = gimbal x transverse with transverse = [-sin phi; cos phi; 0]
    s.col(i) << -std::cos(beta) * cp, -std::cos(beta) * sp, std::sin(beta);
  }
  return ArrayGeometry(g, s, CmgInertiaDiagonals::uniform(4, inertia));
}

SatelliteParams::SatelliteParams(Eigen::Matrix3d body_inertia, ArrayGeometry geometry)
    : body_inertia_(std::move(body_inertia)), geometry_(std::move(geometry)) {
  inertia_ = body_inertia_;
  const auto& r = geometry_.positions();
  const auto& mass = geometry_.masses();
  for (int i = 0; i < geometry_.size(); ++i) {
    inertia_ += mass(i) * (Eigen::Matrix3d::Identity() * r.col(i).squaredNorm() -
                           r.col(i) * r.col(i).transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(inertia_);
  if ((inertia_ - inertia_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * inertia_.norm() ||
      eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument("SatelliteParams: combined inertia must be symmetric positive definite");
  }
}

FrameMatrices frame_matrices(const ArrayGeometry& geom, const Eigen::VectorXd& delta) {
  const Eigen::ArrayXd c = delta.array().cos();
  const Eigen::ArrayXd s = delta.array().sin();
  FrameMatrices f;
  f.spin = geom.spin_axes0() * c.matrix().asDiagonal();
  f.spin -= geom.transverse_axes0() * s.matrix().asDiagonal();
  f.transverse = geom.transverse_axes0() * c.matrix().asDiagonal();
  f.transverse += geom.spin_axes0() * s.matrix().asDiagonal();
  return f;
}

namespace {

Eigen::Matrix3d weighted_gram(const Eigen::Matrix3Xd& a, const Eigen::VectorXd& w) {
  return a * w.asDiagonal() * a.transpose();
}

}  // namespace

Eigen::Matrix3d inertia_jstg(const SatelliteParams& sat, const Eigen::VectorXd& delta) {
  const auto& g = sat.geometry();
  return inertia_jst(sat, delta) + weighted_gram(g.gimbal_axes(), g.inertia().gimbal);
}

Eigen::Matrix3d inertia_jst(const SatelliteParams& sat, const Eigen::VectorXd& delta) {
  const auto& g = sat.geometry();
  const FrameMatrices f = frame_matrices(g, delta);
  return sat.inertia() + weighted_gram(f.spin, g.inertia().spin()) +
         weighted_gram(f.transverse, g.inertia().transverse);
}

Eigen::Matrix3d inertia_jsta(const SatelliteParams& sat, const Eigen::VectorXd& delta) {
  const auto& g = sat.geometry();
  const FrameMatrices f = frame_matrices(g, delta);
  return sat.inertia() + weighted_gram(f.spin, g.inertia().spin_gimbal) +
         weighted_gram(f.transverse, g.inertia().transverse);
}

Eigen::Vector3d hbar(const SatelliteParams& sat, const Eigen::Vector3d& omega,
                     const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swr,
                     const Eigen::VectorXd& h_ga) {
  const auto& g = sat.geometry();
  const FrameMatrices f = frame_matrices(g, delta);
  const Eigen::Matrix3d jst = sat.inertia() + weighted_gram(f.spin, g.inertia().spin()) +
                              weighted_gram(f.transverse, g.inertia().transverse);
  return jst * omega + f.spin * h_swr + g.gimbal_axes() * h_ga;
}

Eigen::Vector3d wbar(const SatelliteParams& sat, const Eigen::Vector3d& h,
                     const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swr,
                     const Eigen::VectorXd& h_ga) {
  const auto& g = sat.geometry();
  const FrameMatrices f = frame_matrices(g, delta);
  const Eigen::Matrix3d jst = sat.inertia() + weighted_gram(f.spin, g.inertia().spin()) +
                              weighted_gram(f.transverse, g.inertia().transverse);
  return jst.ldlt().solve(h - f.spin * h_swr - g.gimbal_axes() * h_ga);
}

namespace {

// [A_s diag(A_t^T w) + A_t diag(A_s^T w)] diag(k) - A_t diag(h)
Eigen::Matrix3Xd actuator_jacobian(const FrameMatrices& f, const Eigen::Vector3d& omega,
                                   const Eigen::VectorXd& k, const Eigen::VectorXd& h) {
  const Eigen::VectorXd r = f.transverse.transpose() * omega;
  const Eigen::VectorXd p = f.spin.transpose() * omega;
  Eigen::Matrix3Xd d = f.spin * (r.array() * k.array()).matrix().asDiagonal();
  d += f.transverse * (p.array() * k.array() - h.array()).matrix().asDiagonal();
  return d;
}

}  // namespace

Eigen::Matrix3Xd jacobian_D(const ArrayGeometry& geom, const Eigen::Vector3d& omega,
                            const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swr) {
  const FrameMatrices f = frame_matrices(geom, delta);
  return actuator_jacobian(f, omega, geom.inertia().transverse - geom.inertia().spin(), h_swr);
}

Eigen::Matrix3Xd jacobian_Da(const ArrayGeometry& geom, const Eigen::Vector3d& omega,
                             const Eigen::VectorXd& delta, const Eigen::VectorXd& h_swa) {
  const FrameMatrices f = frame_matrices(geom, delta);
  return actuator_jacobian(f, omega, geom.inertia().transverse - geom.inertia().spin_gimbal,
                           h_swa);
}

Eigen::VectorXd absolute_wheel_momentum(const ArrayGeometry& geom, const Eigen::Vector3d& omega,
                                        const Eigen::VectorXd& delta,
                                        const Eigen::VectorXd& h_swr) {
  const FrameMatrices f = frame_matrices(geom, delta);
  return h_swr + (geom.inertia().spin_wheel.array() * (f.spin.transpose() * omega).array())
                     .matrix();
}

double singularity_measure(const ArrayGeometry& geom, const Eigen::VectorXd& delta) {
  const FrameMatrices f = frame_matrices(geom, delta);
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(f.transverse);
  const auto& sv = svd.singularValues();
  if (sv.size() < 3) return 0.0;
  return sv(sv.size() - 1);
}

}  // namespace cmgtraj
