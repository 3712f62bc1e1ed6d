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

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/errors.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cmgtraj;
using cmgtraj::testing::max_abs;
using cmgtraj::testing::random_state;
using cmgtraj::testing::random_vector;

namespace {

Eigen::VectorXd rest_state(const SatelliteParams& sat, Rng& rng) {
  const int m = sat.cmg_count();
  const Eigen::VectorXd delta = find_zero_momentum_config(sat, 25.0, rng.next_seed());
  return State::rest(rng.unit_quaternion(), delta, Eigen::VectorXd::Constant(m, 25.0)).vec();
}

// Inertial momentum C(q) hbar(x).
Eigen::Vector3d inertial_momentum(const CmgDynamics& dyn, const Eigen::VectorXd& x) {
  return dyn.constraints(x, Eigen::Vector3d::Zero()).momentum;
}

int numeric_rank(const Eigen::MatrixXd& a, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  return static_cast<int>((s.array() > rel_tol * s(0)).count());
}

// Column-scaled Krylov rank, independent of the regulator implementation.
int controllability_rank(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd k(n, n * b.cols());
  Eigen::MatrixXd blk = b;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < blk.cols(); ++j) {
      const double nrm = blk.col(j).norm();
      if (nrm > 0) blk.col(j) /= nrm;
    }
    k.middleCols(i * b.cols(), b.cols()) = blk;
    blk = a * blk;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(k);
  qr.setThreshold(1e-9);
  return static_cast<int>(qr.rank());
}

std::vector<SatelliteParams> platforms() {
  return {cmgtraj::testing::rooftop_platform(), cmgtraj::testing::pyramid_platform(),
          cmgtraj::testing::rooftop_platform(6)};
}

}  // namespace

TEST_CASE("state layout and typed wrappers") {
  const StateLayout lay{4};
  CHECK(lay.dim() == 19);
  CHECK(lay.control_dim() == 8);
  CHECK(lay.tangent_dim() == 15);
  CHECK(lay.h_ga() + 4 == lay.dim());
  CHECK_THROWS_AS(State(4, Eigen::VectorXd::Zero(18)), InvalidArgument);
  CHECK_THROWS_AS(Control(4, Eigen::VectorXd::Zero(7)), InvalidArgument);
  const State s = State::rest(UnitQuaternion::identity(), Eigen::Vector4d(1, 2, 3, 4),
                              Eigen::Vector4d::Constant(25.0));
  CHECK(s.delta()(2) == 3.0);
  CHECK(s.h_swr()(0) == 25.0);
  CHECK(s.omega().isZero(0.0));
  CHECK(s.h_ga().isZero(0.0));
}

TEST_CASE("rest states are equilibria") {
  Rng rng(31);
  for (const auto& sat : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    for (int k = 0; k < 20; ++k) {
      const State s = State::rest(rng.unit_quaternion(), random_vector(rng, m, 3.0),
                                  random_vector(rng, m, 30.0));
      CHECK(dyn.f(s, Control(m)).isZero(0.0));
    }
  }
}

TEST_CASE("dynamics conserve quaternion norm and inertial momentum instantaneously") {
  Rng rng(32);
  for (const auto& sat : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd x = random_state(rng, m);
      const Eigen::VectorXd u = random_vector(rng, 2 * m, 0.5);
      const Eigen::VectorXd dx = dyn.f(x, u);
      CHECK(std::abs(dx.head<4>().dot(x.head<4>())) < 1e-16);
      // d/ds C(q(x + s dx)) hbar(x + s dx) at s = 0, five-point stencil.
      const double s = 1e-3;
      const auto hm = [&](double t) { return inertial_momentum(dyn, x + t * dx); };
      const Eigen::Vector3d rate = (hm(-2 * s) - 8 * hm(-s) + 8 * hm(s) - hm(2 * s)) / (12 * s);
      CHECK(rate.norm() < 1e-9);
    }
  }
}

TEST_CASE("embedded D_a term agrees with a finite-difference evaluation") {
  Rng rng(33);
  const SatelliteParams sat = cmgtraj::testing::rooftop_platform();
  const CmgDynamics dyn(sat);
  const auto& g = sat.geometry();
  const StateLayout lay{4};
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd x = random_state(rng, 4);
    const Eigen::VectorXd u = random_vector(rng, 8, 0.5);
    const Eigen::Vector3d w = x.segment<3>(lay.omega());
    const Eigen::VectorXd delta = x.segment(lay.delta(), 4);
    const Eigen::VectorXd hs = x.segment(lay.h_swr(), 4);
    const Eigen::VectorXd hg = x.segment(lay.h_ga(), 4);
    const Eigen::VectorXd dx = dyn.f(x, u);
    const Eigen::VectorXd fdel = dx.segment(lay.delta(), 4);
    const Eigen::VectorXd fhga = dx.segment(lay.h_ga(), 4);
    const Eigen::VectorXd hswa = absolute_wheel_momentum(g, w, delta, hs);
    const auto ha = [&](const Eigen::VectorXd& d) {
      return Eigen::Vector3d(inertia_jsta(sat, d) * w + frame_matrices(g, d).spin * hswa);
    };
    const double s = 1e-5;
    const Eigen::Vector3d da_fd = (ha(delta + s * fdel) - ha(delta - s * fdel)) / (2 * s);
    const Eigen::Vector3d hb = hbar(sat, w, delta, hs, hg);
    const Eigen::Vector3d b = hb.cross(w) - da_fd - g.gimbal_axes() * fhga -
                              frame_matrices(g, delta).spin * u.tail(4);
    const Eigen::Vector3d fw = inertia_jsta(sat, delta).ldlt().solve(b);
    const Eigen::Vector3d fw_exact = dx.segment<3>(lay.omega());
    CHECK((fw - fw_exact).norm() <= 1e-8 * std::max(fw_exact.norm(), 1e-12) + 1e-16);
  }
}

TEST_CASE("constraints") {
  Rng rng(34);
  const SatelliteParams sat = cmgtraj::testing::rooftop_platform();
  const CmgDynamics dyn(sat);
  const Eigen::VectorXd x = rest_state(sat, rng);
  const ConstraintResidual r = dyn.constraints(x, Eigen::Vector3d::Zero());
  CHECK(std::abs(r.norm) < 1e-12);
  CHECK(r.momentum.norm() < 1e-12);
  Eigen::VectorXd x2 = x;
  x2.head<4>() *= 2.0;
  CHECK(dyn.constraints(x2, Eigen::Vector3d::Zero()).norm == doctest::Approx(1.0));
}

TEST_CASE("constraint Jacobian matches finite differences and has full rank") {
  Rng rng(35);
  for (const auto& sat : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    const Eigen::Index n = dyn.layout().dim();
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd x = random_state(rng, m);
      const Eigen::MatrixXd z = dyn.constraint_jacobian(x);
      CHECK(numeric_rank(z, 1e-10) == 4);
      Eigen::MatrixXd fd(4, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const ConstraintResidual cp = dyn.constraints(xp, Eigen::Vector3d::Zero());
        const ConstraintResidual cm = dyn.constraints(xm, Eigen::Vector3d::Zero());
        fd(0, j) = (cp.norm - cm.norm) / (2 * h);
        fd.block<3, 1>(1, j) = (cp.momentum - cm.momentum) / (2 * h);
      }
      // Rows 2-4 are the momentum gradient expressed in the body frame.
      const Eigen::Matrix3d c = rotation_polynomial(x.head<4>());
      fd.bottomRows(3) = c.transpose() * fd.bottomRows(3);
      CHECK(max_abs(z - fd) <= 1e-6 * max_abs(z));
    }
  }
}

TEST_CASE("analytic Jacobian matches finite differences") {
  Rng rng(36);
  for (const auto& sat : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    const Eigen::Index n = dyn.layout().dim();
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd x = random_state(rng, m);
      const Eigen::VectorXd u = random_vector(rng, 2 * m, 0.5);
      const Eigen::Vector3d tau = random_vector(rng, 3, 0.01);
      const Eigen::MatrixXd ja = dyn.jacobian(x, u, tau);
      const Eigen::MatrixXd jf = dyn.jacobian_fd(x, u, 1e-6, tau);
      // Relative to each row's scale.
      for (Eigen::Index i = 0; i < n; ++i) {
        const double scale = std::max(ja.row(i).cwiseAbs().maxCoeff(), 1e-12);
        CHECK((ja.row(i) - jf.row(i)).cwiseAbs().maxCoeff() <= 1e-5 * scale);
      }
      const LinearizedDynamics lin = dyn.linearize(x, u);
      CHECK(lin.A.cols() == n);
      CHECK(lin.B.cols() == 2 * m);
      CHECK(lin.B.topRows(4).isZero(0.0));
    }
  }
}

TEST_CASE("tangent basis") {
  Rng rng(37);
  for (const auto& sat : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd x = random_state(rng, m);
      const TangentBasis tb = dyn.tangent_basis(x);
      CHECK(tb.M.rows() == 3 * m + 3);
      CHECK(max_abs(tb.M * tb.M.transpose() -
                    Eigen::MatrixXd::Identity(3 * m + 3, 3 * m + 3)) < 1e-12);
      CHECK(max_abs(tb.M * dyn.constraint_jacobian(x).transpose()) < 1e-10);
      CHECK(max_abs(tb.M.transpose() * tb.M - dyn.tangent_projector(x)) < 1e-12);
      // Deterministic sign convention.
      const TangentBasis again = dyn.tangent_basis(x);
      CHECK(max_abs(again.M - tb.M) == 0.0);
    }
  }
  // Zero quaternion and zero momentum make Z rank deficient.
  const CmgDynamics dyn(cmgtraj::testing::rooftop_platform());
  CHECK_THROWS_AS(dyn.tangent_basis(Eigen::VectorXd::Zero(19)), NumericalError);
}

TEST_CASE("equilibrium structure of the linearization") {
  Rng rng(38);
  for (const auto& sat : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    const Eigen::Index n = dyn.layout().dim();
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd x = rest_state(sat, rng);
      const Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * m);
      const LinearizedDynamics lin = dyn.linearize(x, u);
      const Eigen::MatrixXd z = dyn.constraint_jacobian(x);
      const double scale = max_abs(lin.A) + max_abs(lin.B);
      // Left null vectors of A and B: the constraints are first integrals.
      CHECK(max_abs(z * lin.A) <= 1e-12 * scale * max_abs(z));
      CHECK(max_abs(z * lin.B) <= 1e-12 * scale * max_abs(z));
      CHECK(numeric_rank(lin.A, 1e-12) <= n - 4);

      const TangentBasis tb = dyn.tangent_basis(x);
      const ReducedDynamics red = reduce(lin, tb);
      CHECK(max_abs(red.A - tb.M * lin.A * tb.M.transpose()) == 0.0);
      CHECK(controllability_rank(red.A, red.B) == 3 * m + 3);
      CHECK(controllability_rank(lin.A, lin.B) < 3 * m + 7);

      // Every eigenvalue of the reduced matrix is an eigenvalue of A.
      const Eigen::VectorXcd ea = lin.A.eigenvalues();
      const Eigen::VectorXcd er = red.A.eigenvalues();
      for (Eigen::Index i = 0; i < er.size(); ++i) {
        CHECK((ea.array() - er(i)).abs().minCoeff() <= 1e-8 * (1.0 + scale));
      }
    }
  }
}

TEST_CASE("first integrals hold away from equilibrium") {
  // Differentiating d/dt c(x) = 0 in x gives Z A + dZ[f] = 0 with dZ the
  // directional derivative of the constraint gradient along f.
  Rng rng(39);
  const CmgDynamics dyn(cmgtraj::testing::rooftop_platform());
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd x = random_state(rng, 4);
    const Eigen::VectorXd u = random_vector(rng, 8, 0.5);
    const LinearizedDynamics lin = dyn.linearize(x, u);
    const Eigen::VectorXd dx = dyn.f(x, u);
    const auto grad = [&](const Eigen::VectorXd& y) {
      Eigen::MatrixXd z = dyn.constraint_jacobian(y);
      const Eigen::Matrix3d c = rotation_polynomial(y.head<4>() / y.head<4>().norm());
      z.bottomRows(3) = c * z.bottomRows(3);
      return z;
    };
    const double s = 1e-5;
    const Eigen::MatrixXd dz = (grad(x + s * dx) - grad(x - s * dx)) / (2 * s);
    const Eigen::MatrixXd res = grad(x) * lin.A + dz;
    CHECK(max_abs(res) <= 1e-6 * (max_abs(grad(x) * lin.A) + 1e-12));
    CHECK(max_abs(grad(x) * lin.B) <= 1e-12 * max_abs(grad(x)) * max_abs(lin.B));
  }
}

TEST_CASE("zero-momentum configurations") {
  const SatelliteParams roof = cmgtraj::testing::rooftop_platform();
  const Eigen::Vector4d opposed(std::numbers::pi / 2, -std::numbers::pi / 2,
                                std::numbers::pi / 2, -std::numbers::pi / 2);
  const FrameMatrices f = frame_matrices(roof.geometry(), opposed);
  CHECK((25.0 * f.spin * Eigen::Vector4d::Ones()).norm() < 1e-12);

  for (const auto& sat : platforms()) {
    const int m = sat.cmg_count();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Eigen::VectorXd delta = find_zero_momentum_config(sat, 25.0, seed);
      const FrameMatrices fr = frame_matrices(sat.geometry(), delta);
      CHECK((25.0 * fr.spin * Eigen::VectorXd::Ones(m)).norm() <= 1e-10);
      CHECK(singularity_measure(sat.geometry(), delta) >= 0.1);
      CHECK(max_abs(find_zero_momentum_config(sat, 25.0, seed) - delta) == 0.0);
      // Perturbing any single gimbal by 0.1 rad leaves the zero-momentum set.
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd dp = delta;
        dp(i) += 0.1;
        const FrameMatrices fp = frame_matrices(sat.geometry(), dp);
        CHECK((25.0 * fp.spin * Eigen::VectorXd::Ones(m)).norm() > 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(find_zero_momentum_config(roof, 25.0, 1, 10.0, 3), NumericalError);
}
