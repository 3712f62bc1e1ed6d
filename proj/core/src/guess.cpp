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

#include "cmgtraj/guess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "cmgtraj/errors.hpp"

namespace cmgtraj {

SrParams SrParams::for_wheel_momentum(const Eigen::VectorXd& h_swr_target) {
  SrParams p;
  std::vector<double> v(h_swr_target.data(), h_swr_target.data() + h_swr_target.size());
  if (v.empty()) throw InvalidArgument("SrParams: empty wheel momentum target");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  const double median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  p.sigma_ref = 0.1 * std::abs(median);
  return p;
}

void SrParams::validate() const {
  for (double v : {lambda0, sigma_ref, k_p, k_d, k_delta, k_w, tau_max, rate_max}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("SrParams: all gains and limits must be positive and finite");
    }
  }
}

Eigen::Vector3d torque_command(const UnitQuaternion& q, const Eigen::Vector3d& omega,
                               const UnitQuaternion& q_d, const Eigen::Matrix3d& inertia,
                               const SrParams& params) {
  const Quaternion qe = qprod(conj(q_d.quat()), q.quat());
  const double sgn = qe.s() < 0.0 ? -1.0 : 1.0;
  Eigen::Vector3d tau = -params.k_p * inertia * qe.v() * sgn - params.k_d * inertia * omega;
  return tau.cwiseMax(-params.tau_max).cwiseMin(params.tau_max);
}

Eigen::VectorXd sr_gimbal_rates(const Eigen::Matrix3Xd& D, const Eigen::Vector3d& tau_r,
                                const SrParams& params) {
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(D);
  const auto& s = svd.singularValues();
  const double smin = s.size() < 3 ? 0.0 : s(2);
  const double lambda = params.lambda0 * std::exp(-smin / params.sigma_ref);
  const Eigen::Matrix3d g = D * D.transpose() + lambda * Eigen::Matrix3d::Identity();
  const Eigen::VectorXd rates = D.transpose() * g.ldlt().solve(tau_r);
  return rates.cwiseMax(-params.rate_max).cwiseMin(params.rate_max);
}

Control inner_loop(const CmgDynamics& dyn, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& rates_cmd, const Eigen::VectorXd& h_swr_target,
                   const SrParams& params) {
  const StateLayout& lay = dyn.layout();
  const int m = lay.m;
  const SatelliteParams& sat = dyn.params();
  const auto& geo = sat.geometry();
  const auto& in = geo.inertia();
  const Eigen::VectorXd delta = x.segment(lay.delta(), m);
  const Eigen::VectorXd hs = x.segment(lay.h_swr(), m);
  const FrameMatrices fr = frame_matrices(geo, delta);

  // Gimbal servo: hold the gimbal momentum derivative at Jg k (cmd - rate),
  // cancelling the gyroscopic drift term.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2 * m);
  const Eigen::VectorXd f0 = dyn.f(x, zero);
  const Eigen::VectorXd rate = f0.segment(lay.delta(), m);
  const Eigen::VectorXd drift = f0.segment(lay.h_ga(), m);
  Eigen::VectorXd u(2 * m);
  u.head(m) = in.gimbal.cwiseProduct(params.k_delta * (rates_cmd - rate)) - drift;

  // Wheel hold: f_w is affine in u_w, f_w = c + (I + Jsw A_s^T Ja^{-1} A_s) u_w.
  u.tail(m).setZero();
  const Eigen::VectorXd fw0 = dyn.f(x, u).segment(lay.h_swr(), m);
  const Eigen::Matrix3d ja = inertia_jsta(sat, delta);
  const Eigen::MatrixXd gain = Eigen::MatrixXd::Identity(m, m) +
                               in.spin_wheel.asDiagonal() * fr.spin.transpose() *
                                   ja.ldlt().solve(fr.spin);
  u.tail(m) = gain.partialPivLu().solve(params.k_w * (h_swr_target - hs) - fw0);
  return Control(m, u);
}

Control sr_control(const CmgDynamics& dyn, const Eigen::VectorXd& x, const UnitQuaternion& q_d,
                   const Eigen::VectorXd& h_swr_target, const SrParams& params) {
  const StateLayout& lay = dyn.layout();
  const int m = lay.m;
  const Eigen::Vector3d w = x.segment<3>(lay.omega());
  const UnitQuaternion q = UnitQuaternion::normalized(Quaternion(Eigen::Vector4d(x.head<4>())));
  const Eigen::Vector3d tau = torque_command(q, w, q_d, dyn.params().inertia(), params);
  const Eigen::Matrix3Xd D = jacobian_D(dyn.params().geometry(), w, x.segment(lay.delta(), m),
                                        x.segment(lay.h_swr(), m));
  // The array absorbs D rates of momentum, so the body sees -D rates.
  const Eigen::VectorXd rates = sr_gimbal_rates(D, -tau, params);
  return inner_loop(dyn, x, rates, h_swr_target, params);
}

Trajectory generate_guess(const StepMap& map, const Eigen::VectorXd& x0,
                          const UnitQuaternion& q_d, const Eigen::VectorXd& h_swr_target,
                          int intervals, const SrParams& params) {
  params.validate();
  const CmgDynamics& dyn = map.dynamics();
  const Eigen::Index n = dyn.layout().dim();
  const Eigen::Index nu = dyn.layout().control_dim();
  if (x0.size() != n) throw InvalidArgument("generate_guess: initial state has wrong dimension");
  Eigen::MatrixXd x(n, intervals + 1);
  Eigen::MatrixXd u(nu, intervals + 1);
  x.col(0) = x0;
  const auto error_at = [&](int k) {
    const UnitQuaternion q =
        UnitQuaternion::normalized(Quaternion(Eigen::Vector4d(x.col(k).head<4>())));
    return attitude_error(q, q_d);
  };
  for (int k = 0; k <= intervals; ++k) {
    u.col(k) = sr_control(dyn, x.col(k), q_d, h_swr_target, params).vec();
    if (k < intervals) x.col(k + 1) = map.step(x.col(k), u.col(k));
  }
  const int half = intervals / 2;
  const double mid_err = error_at(half);
  const double end_err = error_at(intervals);
  if (end_err > mid_err && end_err > 1e-3) {
    std::ostringstream os;
    os << "generate_guess: attitude error grew from " << mid_err << " rad at T/2 to " << end_err
       << " rad at T";
    throw NumericalError(os.str());
  }
  return Trajectory({map.dt(), intervals}, std::move(x), std::move(u));
}

}  // namespace cmgtraj
