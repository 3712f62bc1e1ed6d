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

#include "cmgtraj/opt.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cmgtraj/errors.hpp"

namespace cmgtraj {

RegulatorWeights RegulatorWeights::from_design(const LqrWeights& w, const RegulatorDesign& d,
                                               int m) {
  return {assemble_Qc(w, m), assemble_R(w, m), d.reg.P};
}

Trajectory project(const StepMap& map, const Trajectory& curve, const ProjectionRegulator& reg,
                   const Eigen::VectorXd& x0, double state_bound) {
  const int N = curve.intervals();
  if (static_cast<int>(reg.K.size()) != N + 1) {
    throw InvalidArgument("project: regulator and curve sample counts differ");
  }
  Eigen::MatrixXd x(curve.x().rows(), N + 1);
  Eigen::MatrixXd u(curve.u().rows(), N + 1);
  x.col(0) = x0;
  for (int k = 0; k <= N; ++k) {
    u.col(k) = curve.u().col(k) + reg.K[k] * (curve.x().col(k) - x.col(k));
    if (k == N) break;
    x.col(k + 1) = map.step(x.col(k), u.col(k));
    if (!(x.col(k + 1).cwiseAbs().maxCoeff() <= state_bound)) {
      std::ostringstream os;
      os << "project: state left the bound " << state_bound << " at t = " << curve.time(k + 1);
      throw NumericalError(os.str());
    }
  }
  return Trajectory(curve.grid(), std::move(x), std::move(u));
}

namespace {

double node_weight(int k, int N, double h) { return (k == 0 || k == N) ? 0.5 * h : h; }

}  // namespace

namespace {

void check_riccati(const Eigen::MatrixXd& P, double blowup, double t) {
  if (!P.allFinite() || P.cwiseAbs().maxCoeff() > blowup) {
    std::ostringstream os;
    os << "tv_regulator: Riccati solution blew up at t = " << t;
    throw NumericalError(os.str());
  }
}

// Deviations normal to the constraint manifold are invariant, so both the
// cost-to-go and the gain are restricted to the tangent space.
ProjectionRegulator sampled_regulator(const CmgDynamics& dyn, const Trajectory& traj,
                                      const std::vector<StepLinearization>& steps,
                                      const RegulatorWeights& weights, double blowup) {
  const int N = traj.intervals();
  const double h = traj.grid().dt;
  Eigen::MatrixXd pi = dyn.tangent_projector(traj.x().col(N));
  ProjectionRegulator reg;
  reg.K.resize(N + 1);
  Eigen::MatrixXd P = pi * (weights.P_T + node_weight(N, N, h) * weights.Qc) * pi;
  const Eigen::MatrixXd Rd = h * weights.R;
  for (int k = N - 1; k >= 0; --k) {
    const Eigen::MatrixXd& A = steps[k].Phi_x;
    const Eigen::MatrixXd& B = steps[k].Phi_u;
    pi = dyn.tangent_projector(traj.x().col(k));
    const Eigen::MatrixXd pb = P * B;
    const Eigen::LDLT<Eigen::MatrixXd> s(Rd + B.transpose() * pb);
    reg.K[k] = s.solve(pb.transpose() * A) * pi;
    P = A.transpose() * P * A - A.transpose() * pb * s.solve(pb.transpose() * A);
    P = pi * (node_weight(k, N, h) * weights.Qc + 0.5 * (P + P.transpose())) * pi;
    check_riccati(P, blowup, traj.time(k));
  }
  // The last sample holds no interval; reuse the final gain.
  reg.K[N] = N > 0 ? reg.K[N - 1] : Eigen::MatrixXd::Zero(weights.R.rows(), P.rows());
  return reg;
}

ProjectionRegulator differential_regulator(const StepMap& map, const Trajectory& traj,
                                           const RegulatorWeights& weights, double blowup) {
  const CmgDynamics& dyn = map.dynamics();
  const int N = traj.intervals();
  const double h = traj.grid().dt;
  const Eigen::Index n = dyn.layout().dim();
  const Eigen::Index nu = weights.R.rows();
  const Eigen::LDLT<Eigen::MatrixXd> r_ldlt(weights.R);

  ProjectionRegulator reg;
  reg.K.resize(N + 1);
  Eigen::MatrixXd pi = dyn.tangent_projector(traj.x().col(N));
  Eigen::MatrixXd P = pi * weights.P_T * pi;
  Eigen::MatrixXd j_right = dyn.jacobian(traj.x().col(N), traj.u().col(N));
  reg.K[N] = r_ldlt.solve(j_right.rightCols(nu).transpose() * P) * pi;
  Eigen::MatrixXd q_right = pi * weights.Qc * pi;
  Eigen::VectorXd y(n * n);
  for (int k = N - 1; k >= 0; --k) {
    // The control on [t_k, t_{k+1}) is u_k at both ends.
    j_right = dyn.jacobian(traj.x().col(k + 1), traj.u().col(k));
    const Eigen::MatrixXd j_left = dyn.jacobian(traj.x().col(k), traj.u().col(k));
    pi = dyn.tangent_projector(traj.x().col(k));
    const Eigen::MatrixXd q_left = pi * weights.Qc * pi;

    Eigen::Map<Eigen::MatrixXd>(y.data(), n, n) = P;
    // s runs backward in time from t_{k+1} (s = 0) to t_k (s = h).
    map.integrator().integrate(
        [&](double s, const Eigen::VectorXd& yy, Eigen::VectorXd& dy) {
          const double a = s / h;
          const Eigen::MatrixXd A = (1.0 - a) * j_right.leftCols(n) + a * j_left.leftCols(n);
          const Eigen::MatrixXd B = (1.0 - a) * j_right.rightCols(nu) + a * j_left.rightCols(nu);
          Eigen::Map<const Eigen::MatrixXd> pm(yy.data(), n, n);
          const Eigen::MatrixXd pa = pm * A;
          const Eigen::MatrixXd bp = B.transpose() * pm;
          dy.resize(n * n);
          Eigen::Map<Eigen::MatrixXd>(dy.data(), n, n) =
              pa.transpose() + pa + (1.0 - a) * q_right + a * q_left -
              bp.transpose() * r_ldlt.solve(bp);
        },
        0.0, h, y);
    P = Eigen::Map<const Eigen::MatrixXd>(y.data(), n, n);
    P = pi * (0.5 * (P + P.transpose())) * pi;
    check_riccati(P, blowup, traj.time(k));
    reg.K[k] = r_ldlt.solve(j_left.rightCols(nu).transpose() * P) * pi;
    q_right = q_left;
  }
  return reg;
}

}  // namespace

ProjectionRegulator tv_regulator(const StepMap& map, const Trajectory& traj,
                                 const std::vector<StepLinearization>& steps,
                                 const RegulatorWeights& weights, RiccatiForm form,
                                 double blowup) {
  if (form == RiccatiForm::kSampled) {
    if (static_cast<int>(steps.size()) != traj.intervals()) {
      throw InvalidArgument("tv_regulator: one step linearization per interval required");
    }
    return sampled_regulator(map.dynamics(), traj, steps, weights, blowup);
  }
  return differential_regulator(map, traj, weights, blowup);
}

double objective(const Trajectory& traj, const CostFunctional& cost) {
  const int N = traj.intervals();
  const double h = traj.grid().dt;
  const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(traj.u().rows());
  double total = 0.0;
  for (int k = 0; k <= N; ++k) {
    total += node_weight(k, N, h) * cost.stage_cost(traj.x().col(k), zero_u);
    if (k < N) total += h * 0.5 * traj.u().col(k).dot(cost.R() * traj.u().col(k));
  }
  return total + cost.terminal_cost(traj.x().col(N));
}

std::vector<StepLinearization> linearize_steps(const StepMap& map, const Trajectory& traj) {
  std::vector<StepLinearization> steps;
  steps.reserve(traj.intervals());
  for (int k = 0; k < traj.intervals(); ++k) {
    steps.push_back(map.linearize(traj.x().col(k), traj.u().col(k)));
  }
  return steps;
}

namespace {

// h * Hessian of lambda^T f at (x, u), by central differences of J^T lambda.
Eigen::MatrixXd curvature(const CmgDynamics& dyn, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& lambda, double h) {
  const Eigen::Index n = x.size(), nu = u.size();
  Eigen::MatrixXd H(n + nu, n + nu);
  Eigen::VectorXd xp = x, up = u;
  for (Eigen::Index j = 0; j < n + nu; ++j) {
    double& v = j < n ? xp(j) : up(j - n);
    const double v0 = v;
    const double eps = 1e-5 * std::max(1.0, std::abs(v0));
    v = v0 + eps;
    const Eigen::VectorXd gp = dyn.jacobian(xp, up).transpose() * lambda;
    v = v0 - eps;
    const Eigen::VectorXd gm = dyn.jacobian(xp, up).transpose() * lambda;
    v = v0;
    H.col(j) = (gp - gm) / (2 * eps);
  }
  return 0.5 * h * (H + H.transpose());
}

struct LqResult {
  Eigen::MatrixXd z, v;
  bool convex = true;
};

LqResult solve_lq(const std::vector<StepLinearization>& steps, const Eigen::MatrixXd& a,
                  const Eigen::MatrixXd& b, const std::vector<Eigen::MatrixXd>& wxx,
                  const std::vector<Eigen::MatrixXd>& wuu, const std::vector<Eigen::MatrixXd>& wux,
                  const Eigen::MatrixXd& w_terminal, const Eigen::VectorXd& r_terminal) {
  const int N = static_cast<int>(steps.size());
  const Eigen::Index n = a.rows(), nu = b.rows();
  std::vector<Eigen::MatrixXd> gains(N);
  std::vector<Eigen::VectorXd> ff(N);
  Eigen::MatrixXd P = w_terminal;
  Eigen::VectorXd p = r_terminal;
  LqResult out;
  for (int k = N - 1; k >= 0; --k) {
    const Eigen::MatrixXd& fx = steps[k].Phi_x;
    const Eigen::MatrixXd& fu = steps[k].Phi_u;
    const Eigen::MatrixXd pfx = P * fx;
    const Eigen::MatrixXd pfu = P * fu;
    const Eigen::MatrixXd qxx = wxx[k] + fx.transpose() * pfx;
    const Eigen::MatrixXd quu = wuu[k] + fu.transpose() * pfu;
    const Eigen::MatrixXd qux = wux[k] + fu.transpose() * pfx;
    const Eigen::VectorXd qx = a.col(k) + fx.transpose() * p;
    const Eigen::VectorXd qu = b.col(k) + fu.transpose() * p;
    const Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (quu + quu.transpose()));
    if (llt.info() != Eigen::Success) {
      out.convex = false;
      return out;
    }
    gains[k] = llt.solve(qux);
    ff[k] = llt.solve(qu);
    P = qxx - qux.transpose() * gains[k];
    P = 0.5 * (P + P.transpose());
    p = qx - qux.transpose() * ff[k];
  }
  out.z = Eigen::MatrixXd::Zero(n, N + 1);
  out.v = Eigen::MatrixXd::Zero(nu, N + 1);
  for (int k = 0; k < N; ++k) {
    out.v.col(k) = -gains[k] * out.z.col(k) - ff[k];
    out.z.col(k + 1) = steps[k].Phi_x * out.z.col(k) + steps[k].Phi_u * out.v.col(k);
  }
  return out;
}

}  // namespace

DescentDirection descent_direction(const StepMap& map, const Trajectory& traj,
                                   const std::vector<StepLinearization>& steps,
                                   const CostFunctional& cost, DescentOrder order,
                                   const ProjectionRegulator* reg) {
  const CmgDynamics& dyn = map.dynamics();
  const int N = traj.intervals();
  const double h = traj.grid().dt;
  const Eigen::Index n = traj.x().rows(), nu = traj.u().rows();
  if (static_cast<int>(steps.size()) != N) {
    throw InvalidArgument("descent_direction: one step linearization per interval required");
  }

  // Gradient of the objective.
  Eigen::MatrixXd a(n, N + 1), b = Eigen::MatrixXd::Zero(nu, N + 1);
  for (int k = 0; k <= N; ++k) {
    a.col(k) = node_weight(k, N, h) * (cost.Q() * (traj.x().col(k) - cost.target()));
    if (k < N) b.col(k) = h * (cost.R() * traj.u().col(k));
  }
  const Eigen::VectorXd r_terminal = cost.P() * (traj.x().col(N) - cost.target());
  const Eigen::MatrixXd w_terminal = node_weight(N, N, h) * cost.Q() + cost.P();

  std::vector<Eigen::MatrixXd> wxx(N), wuu(N), wux(N);
  const auto first_order_weights = [&] {
    for (int k = 0; k < N; ++k) {
      wxx[k] = node_weight(k, N, h) * cost.Q();
      wuu[k] = h * cost.R();
      wux[k] = Eigen::MatrixXd::Zero(nu, n);
    }
  };

  DescentDirection out;
  LqResult lq;
  bool done = false;
  if (order == DescentOrder::kSecond) {
    first_order_weights();
    if (reg && static_cast<int>(reg->K.size()) != N + 1) {
      throw InvalidArgument("descent_direction: regulator and trajectory sample counts differ");
    }
    Eigen::VectorXd lambda = a.col(N) + r_terminal;
    for (int k = N - 1; k >= 0; --k) {
      const Eigen::MatrixXd H = curvature(dyn, traj.x().col(k), traj.u().col(k), lambda, h);
      // Feasible directions stay tangent; drop curvature along the normals.
      const Eigen::MatrixXd pi = dyn.tangent_projector(traj.x().col(k));
      wxx[k] += pi * H.topLeftCorner(n, n) * pi;
      wuu[k] += H.bottomRightCorner(nu, nu);
      wux[k] += H.bottomLeftCorner(nu, n) * pi;
      if (reg) {
        const Eigen::MatrixXd& K = reg->K[k];
        lambda = a.col(k) - K.transpose() * b.col(k) +
                 (steps[k].Phi_x - steps[k].Phi_u * K).transpose() * lambda;
      } else {
        lambda = a.col(k) + steps[k].Phi_x.transpose() * lambda;
      }
    }
    lq = solve_lq(steps, a, b, wxx, wuu, wux, w_terminal, r_terminal);
    if (lq.convex) {
      out.order = DescentOrder::kSecond;
      done = true;
    } else {
      out.fallback = true;
    }
  }
  if (!done) {
    first_order_weights();
    lq = solve_lq(steps, a, b, wxx, wuu, wux, w_terminal, r_terminal);
    if (!lq.convex) throw NumericalError("descent_direction: first-order subproblem not convex");
    out.order = DescentOrder::kFirst;
  }
  double theta = r_terminal.dot(lq.z.col(N));
  for (int k = 0; k <= N; ++k) theta += a.col(k).dot(lq.z.col(k)) + b.col(k).dot(lq.v.col(k));
  if (out.order == DescentOrder::kSecond && theta > 0.0) {
    // Curvature made the model direction ascent; use the convex model.
    first_order_weights();
    lq = solve_lq(steps, a, b, wxx, wuu, wux, w_terminal, r_terminal);
    out.order = DescentOrder::kFirst;
    out.fallback = true;
    theta = r_terminal.dot(lq.z.col(N));
    for (int k = 0; k <= N; ++k) theta += a.col(k).dot(lq.z.col(k)) + b.col(k).dot(lq.v.col(k));
  }
  out.z = std::move(lq.z);
  out.v = std::move(lq.v);
  out.theta = theta;
  return out;
}

LineSearchResult line_search(const StepMap& map, const Trajectory& traj, double cost_now,
                             const DescentDirection& dir, const CostFunctional& cost,
                             const ProjectionRegulator& reg, const LineSearchConfig& config) {
  LineSearchResult out;
  if (!(dir.theta < 0.0)) return out;
  double gamma = 1.0;
  while (gamma >= config.min_step) {
    Trajectory candidate(traj.grid(), traj.x() + gamma * dir.z, traj.u() + gamma * dir.v);
    try {
      Trajectory next = project(map, candidate, reg, traj.x().col(0));
      const double c = objective(next, cost);
      if (c <= cost_now + config.armijo * gamma * dir.theta) {
        out.gamma = gamma;
        out.cost = c;
        out.trajectory.emplace(std::move(next));
        return out;
      }
    } catch (const NumericalError&) {
      // Diverged candidate: contract.
    }
    gamma *= config.contraction;
  }
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kConverged:
      return "converged";
    case Termination::kMaxIterations:
      return "max_iterations";
    case Termination::kStall:
      return "stall";
  }
  return "unknown";
}

SolverReport solve(const StepMap& map, const Eigen::VectorXd& x0, const CostFunctional& cost,
                   const Trajectory& guess, const RegulatorWeights& reg,
                   const SolverConfig& config, const IterationCallback& on_iter) {
  if (config.max_iters < 0 || !(config.theta_tol > 0.0)) {
    throw InvalidArgument("solve: max_iters must be >= 0 and theta_tol positive");
  }
  const std::vector<StepLinearization> guess_steps =
      config.riccati == RiccatiForm::kSampled ? linearize_steps(map, guess)
                                              : std::vector<StepLinearization>{};
  Trajectory traj =
      project(map, guess, tv_regulator(map, guess, guess_steps, reg, config.riccati), x0);
  SolverReport report{traj, objective(traj, cost), 0.0, 0.0, {}, Termination::kMaxIterations, ""};
  double cost_now = report.initial_cost;
  double last_theta = -std::numeric_limits<double>::infinity();

  for (int it = 0; it < config.max_iters; ++it) {
    const std::vector<StepLinearization> steps = linearize_steps(map, traj);
    const ProjectionRegulator K = tv_regulator(map, traj, steps, reg, config.riccati);
    const bool near = config.second_order && std::abs(last_theta) < config.second_order_switch;
    const DescentDirection dir = descent_direction(
        map, traj, steps, cost, near ? DescentOrder::kSecond : DescentOrder::kFirst, &K);
    last_theta = dir.theta;
    IterationRecord rec{it, cost_now, dir.theta, 0.0, dir.order, dir.fallback};
    if (std::abs(dir.theta) <= config.theta_tol) {
      report.history.push_back(rec);
      if (on_iter) on_iter(rec);
      report.termination = Termination::kConverged;
      break;
    }
    LineSearchResult ls = line_search(map, traj, cost_now, dir, cost, K, config.line_search);
    if (!ls.trajectory) {
      report.history.push_back(rec);
      if (on_iter) on_iter(rec);
      report.termination = Termination::kStall;
      std::ostringstream os;
      os << "line search stalled at iteration " << it << " (theta " << dir.theta << ")";
      report.message = os.str();
      break;
    }
    rec.step = ls.gamma;
    report.history.push_back(rec);
    if (on_iter) on_iter(rec);
    traj = std::move(*ls.trajectory);
    cost_now = ls.cost;
  }
  report.final_cost = cost_now;
  report.final_theta = last_theta;
  report.trajectory = std::move(traj);
  return report;
}

ManeuverMetrics metrics(const CmgDynamics& dyn, const Trajectory& traj,
                        const CostFunctional& cost, double settle_deg) {
  const StateLayout& lay = dyn.layout();
  const int m = lay.m;
  const int N = traj.intervals();
  const double h = traj.grid().dt;
  const auto& geo = dyn.params().geometry();
  const Eigen::VectorXd& jsw = geo.inertia().spin_wheel;
  const UnitQuaternion q_d =
      UnitQuaternion::normalized(Quaternion(Eigen::Vector4d(cost.target().head<4>())));

  const auto power = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const Eigen::VectorXd delta = x.segment(lay.delta(), m);
    const Eigen::Vector3d w = x.segment<3>(lay.omega());
    const FrameMatrices fr = frame_matrices(geo, delta);
    const Eigen::VectorXd wheel_rate =
        x.segment(lay.h_swr(), m).cwiseQuotient(jsw) + fr.spin.transpose() * w;
    const Eigen::VectorXd gimbal_rate =
        x.segment(lay.h_ga(), m).cwiseQuotient(geo.inertia().gimbal) -
        geo.gimbal_axes().transpose() * w;
    return u.tail(m).cwiseProduct(wheel_rate).cwiseAbs().sum() +
           u.head(m).cwiseProduct(gimbal_rate).cwiseAbs().sum();
  };
  const auto error_deg = [&](int k) {
    const UnitQuaternion q =
        UnitQuaternion::normalized(Quaternion(Eigen::Vector4d(traj.x().col(k).head<4>())));
    return attitude_error(q, q_d) * 180.0 / std::numbers::pi;
  };

  ManeuverMetrics mm;
  mm.maneuver_cost = objective(traj, cost);
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd u = traj.u().col(k);
    mm.control_effort += h * u.cwiseAbs().sum();
    mm.maneuver_energy +=
        0.5 * h * (power(traj.x().col(k), u) + power(traj.x().col(k + 1), u));
    mm.max_ug = std::max(mm.max_ug, u.head(m).cwiseAbs().maxCoeff());
    mm.max_uw = std::max(mm.max_uw, u.tail(m).cwiseAbs().maxCoeff());
  }
  int settle = N + 1;
  for (int k = N; k >= 0 && error_deg(k) < settle_deg; --k) settle = k;
  mm.maneuver_time = settle > N ? traj.time(N) : traj.time(settle);
  mm.final_att_error = error_deg(N);
  return mm;
}

}  // namespace cmgtraj
