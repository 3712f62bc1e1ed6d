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

#include "cmgtraj/trajectory.hpp"

#include <cmath>
#include <sstream>

#include "cmgtraj/errors.hpp"

namespace cmgtraj {

TimeGrid TimeGrid::over(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) {
    throw InvalidArgument("TimeGrid: horizon and step must be positive");
  }
  const double n = horizon / dt;
  const long rounded = std::lround(n);
  if (std::abs(n - static_cast<double>(rounded)) > 1e-9 * n || rounded < 1) {
    std::ostringstream os;
    os << "TimeGrid: horizon " << horizon << " is not a multiple of the step " << dt;
    throw InvalidArgument(os.str());
  }
  return {dt, static_cast<int>(rounded)};
}

Trajectory::Trajectory(TimeGrid grid, Eigen::MatrixXd x, Eigen::MatrixXd u)
    : grid_(grid), x_(std::move(x)), u_(std::move(u)) {
  if (x_.cols() != grid_.intervals + 1 || u_.cols() != grid_.intervals + 1) {
    throw InvalidArgument("Trajectory: sample count must equal intervals + 1");
  }
}

int Trajectory::interval_of(double t) const {
  if (!(t >= 0.0) || t > grid_.horizon() * (1.0 + 1e-12)) {
    throw InvalidArgument("Trajectory: time outside the horizon");
  }
  const int k = static_cast<int>(std::floor(t / grid_.dt));
  return std::clamp(k, 0, grid_.intervals - 1);
}

Eigen::VectorXd Trajectory::state_at(const CmgDynamics& dyn, double t) const {
  const int k = interval_of(t);
  const double h = grid_.dt;
  const double s = (t - time(k)) / h;
  const Eigen::VectorXd& x0 = x_.col(k);
  const Eigen::VectorXd& x1 = x_.col(k + 1);
  const Eigen::VectorXd f0 = dyn.f(x0, u_.col(k));
  const Eigen::VectorXd f1 = dyn.f(x1, u_.col(k));
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * x1 +
         (s3 - s2) * h * f1;
}

Eigen::VectorXd Trajectory::control_at(double t) const { return u_.col(interval_of(t)); }

StepMap::StepMap(const CmgDynamics& dyn, double dt, Tolerances tol)
    : dyn_(dyn), dt_(dt), rk_(tol) {
  if (!(dt > 0.0)) throw InvalidArgument("StepMap: step must be positive");
}

Eigen::VectorXd StepMap::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  Eigen::VectorXd y = x;
  rk_.integrate([&](double, const Eigen::VectorXd& s, Eigen::VectorXd& ds) { ds = dyn_.f(s, u); },
                0.0, dt_, y);
  return y;
}

StepLinearization StepMap::linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const Eigen::Index n = x.size();
  const Eigen::Index nu = u.size();
  const Eigen::Index cols = n + nu;
  Eigen::VectorXd y(n + n * cols);
  y.head(n) = x;
  Eigen::Map<Eigen::MatrixXd> s0(y.data() + n, n, cols);
  s0.setZero();
  s0.leftCols(n).setIdentity();
  rk_.integrate(
      [&](double, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
        const Eigen::VectorXd xs = s.head(n);
        const Eigen::MatrixXd jac = dyn_.jacobian(xs, u);
        ds.resize(s.size());
        ds.head(n) = dyn_.f(xs, u);
        Eigen::Map<const Eigen::MatrixXd> sm(s.data() + n, n, cols);
        Eigen::Map<Eigen::MatrixXd> dsm(ds.data() + n, n, cols);
        dsm.noalias() = jac.leftCols(n) * sm;
        dsm.rightCols(nu) += jac.rightCols(nu);
      },
      0.0, dt_, y, n);
  Eigen::Map<const Eigen::MatrixXd> sf(y.data() + n, n, cols);
  return {sf.leftCols(n), sf.rightCols(nu)};
}

Trajectory simulate(const StepMap& map, const Eigen::VectorXd& x0, const Eigen::MatrixXd& u) {
  const int intervals = static_cast<int>(u.cols()) - 1;
  Eigen::MatrixXd x(x0.size(), intervals + 1);
  x.col(0) = x0;
  for (int k = 0; k < intervals; ++k) x.col(k + 1) = map.step(x.col(k), u.col(k));
  return Trajectory({map.dt(), intervals}, std::move(x), u);
}

Eigen::MatrixXd constraint_residuals(const CmgDynamics& dyn, const Trajectory& traj,
                                     const Eigen::Vector3d& h0) {
  Eigen::MatrixXd r(4, traj.intervals() + 1);
  for (int k = 0; k <= traj.intervals(); ++k) {
    const ConstraintResidual c = dyn.constraints(traj.x().col(k), h0);
    r(0, k) = c.norm;
    r.block<3, 1>(1, k) = c.momentum;
  }
  return r;
}

double reintegration_defect(const StepMap& map, const Trajectory& traj) {
  double worst = 0.0;
  for (int k = 0; k < traj.intervals(); ++k) {
    const Eigen::VectorXd next = map.step(traj.x().col(k), traj.u().col(k));
    const double scale = std::max(1.0, traj.x().col(k + 1).norm());
    worst = std::max(worst, (next - traj.x().col(k + 1)).norm() / scale);
  }
  return worst;
}

}  // namespace cmgtraj
