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

// Acceptance checks, one process per criterion:
//
//   cmgtraj_acceptance <1..10> [--expect-fail CHECK]... [paths]
//
// Each check prints one indented line; the criterion ends with a single
// "criterion N ...: PASS|FAIL" line. Exit status is zero when the failing
// checks are exactly the ones named with --expect-fail, so a documented
// shortfall stays visible in the output without breaking the suite.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cmgtraj/array.hpp"
#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/guess.hpp"
#include "cmgtraj/integrator.hpp"
#include "cmgtraj/opt.hpp"
#include "cmgtraj/quat.hpp"
#include "cmgtraj/regulator.hpp"
#include "cmgtraj/rng.hpp"
#include "cmgtraj_harness/config.hpp"
#include "cmgtraj_harness/runs.hpp"

namespace fs = std::filesystem;
using namespace cmgtraj;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

struct Paths {
  std::string cli;
  std::string scenarios;
  std::string solve_dir;
  std::string work_dir;
};

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

class Report {
 public:
  void add(std::string name, bool passed, std::string detail) {
    checks_.push_back({std::move(name), passed, std::move(detail)});
  }
  // value <= bound, with the numbers in the detail line
  void at_most(const std::string& name, double value, double bound) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.3g (bound %.3g)", value, bound);
    add(name, value <= bound, buf);
  }
  const std::vector<Check>& checks() const { return checks_; }

 private:
  std::vector<Check> checks_;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

Eigen::VectorXd uniform_vector(Rng& rng, Eigen::Index n, double scale) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.uniform(-1.0, 1.0);
  return v;
}

Eigen::Matrix3d platform_inertia() { return Eigen::Vector3d(1500.0, 1500.0, 2000.0).asDiagonal(); }

constexpr double kPyramidBeta = 0.95531661812450930;  // atan(sqrt 2), 54.74 deg

std::vector<std::pair<std::string, SatelliteParams>> platforms() {
  return {{"rooftop", SatelliteParams(platform_inertia(), rooftop(4, kPi / 4))},
          {"pyramid", SatelliteParams(platform_inertia(), pyramid(kPyramidBeta))}};
}

// Generic state with unit quaternion and maneuver-sized magnitudes.
Eigen::VectorXd random_state(Rng& rng, int m) {
  const StateLayout lay{m};
  Eigen::VectorXd x(lay.dim());
  x.segment<4>(0) = rng.unit_quaternion().vec();
  x.segment(lay.h_swr(), m) = Eigen::VectorXd::Constant(m, 25.0) + uniform_vector(rng, m, 2.0);
  x.segment<3>(lay.omega()) = uniform_vector(rng, 3, 0.02);
  x.segment(lay.delta(), m) = uniform_vector(rng, m, kPi);
  x.segment(lay.h_ga(), m) = uniform_vector(rng, m, 0.05);
  return x;
}

// Rest state on the zero-momentum manifold.
Eigen::VectorXd random_equilibrium(Rng& rng, const SatelliteParams& sat) {
  const int m = sat.cmg_count();
  const Eigen::VectorXd delta = find_zero_momentum_config(sat, 25.0, rng.next_seed());
  return State::rest(rng.unit_quaternion(), delta, Eigen::VectorXd::Constant(m, 25.0)).vec();
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(p.string() + ": cannot open");
  return nlohmann::json::parse(in);
}

// ---------------------------------------------------------------- 1

void quaternion_suite(Report& r) {
  Rng rng(101);
  double triple = 0.0, homo = 0.0, sandwich = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Vector4d a(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector4d b(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    const Quaternion q(a), p(b);
    // component oracle
    const double s = a(0) * b(0) - a.tail<3>().dot(b.tail<3>());
    const Eigen::Vector3d v = a(0) * b.tail<3>() + b(0) * a.tail<3>() + a.tail<3>().cross(b.tail<3>());
    Eigen::Vector4d oracle;
    oracle << s, v;
    const double scale = std::max(1.0, a.norm() * b.norm());
    triple = std::max({triple, max_abs(qprod(q, p).vec() - oracle) / scale,
                       max_abs(left_matrix(q) * b - oracle) / scale,
                       max_abs(right_matrix(p) * a - oracle) / scale});

    const UnitQuaternion uq = rng.unit_quaternion(), up = rng.unit_quaternion();
    const UnitQuaternion uqp = UnitQuaternion::normalized(uq.quat() * up.quat());
    homo = std::max(homo, max_abs(rotm(uqp).matrix() - rotm(uq).matrix() * rotm(up).matrix()));
    const Eigen::Vector3d w(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d rotated = (uq.quat() * pure(w) * conj(uq.quat())).v();
    sandwich = std::max(sandwich, (rotm(uq) * w - rotated).norm() / std::max(1.0, w.norm()));
  }
  r.at_most("product: component, O_L and O_R forms agree (1000 pairs)", triple, 1e-13);
  r.at_most("rotm(q p) = rotm(q) rotm(p)", homo, 1e-11);
  r.at_most("rotm(q) v = Im(q [0; v] q*)", sandwich, 1e-12);
}

// ---------------------------------------------------------------- 2

void geometry_suite(Report& r) {
  Rng rng(202);
  double zero_gap = 0.0, triad = 0.0, min_eig = INFINITY, asym = 0.0, d_gap = 0.0, da_gap = 0.0;
  for (const auto& [name, sat] : platforms()) {
    const ArrayGeometry& g = sat.geometry();
    const int m = g.size();
    const FrameMatrices f0 = frame_matrices(g, Eigen::VectorXd::Zero(m));
    zero_gap = std::max({zero_gap, max_abs(f0.spin - g.spin_axes0()), max_abs(f0.transverse - g.transverse_axes0())});

    for (int k = 0; k < 10000; ++k) {
      const Eigen::VectorXd delta = uniform_vector(rng, m, kPi);
      const FrameMatrices f = frame_matrices(g, delta);
      if (k < 1000) {
        for (int i = 0; i < m; ++i) {
          const Eigen::Vector3d ag = g.gimbal_axes().col(i), as = f.spin.col(i), at = f.transverse.col(i);
          triad = std::max({triad, (at - as.cross(ag)).norm(), std::abs(as.norm() - 1.0),
                            std::abs(at.norm() - 1.0), std::abs(as.dot(ag)), std::abs(at.dot(ag))});
        }
      }
      for (const Eigen::Matrix3d& J :
           {inertia_jstg(sat, delta), inertia_jst(sat, delta), inertia_jsta(sat, delta)}) {
        asym = std::max(asym, max_abs(J - J.transpose()));
        min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(J).eigenvalues()(0));
      }
    }

    for (int k = 0; k < 100; ++k) {
      const Eigen::Vector3d w = uniform_vector(rng, 3, 0.05);
      const Eigen::VectorXd delta = uniform_vector(rng, m, kPi);
      const Eigen::VectorXd hs = Eigen::VectorXd::Constant(m, 25.0) + uniform_vector(rng, m, 5.0);
      const Eigen::VectorXd hg = uniform_vector(rng, m, 0.1);
      const Eigen::VectorXd hswa = absolute_wheel_momentum(g, w, delta, hs);
      const auto ha = [&](const Eigen::VectorXd& d) {
        return Eigen::Vector3d(inertia_jsta(sat, d) * w + frame_matrices(g, d).spin * hswa);
      };
      const double step = 1e-5;
      Eigen::Matrix3Xd fd(3, m), fda(3, m);
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd dp = delta, dm = delta;
        dp(i) += step;
        dm(i) -= step;
        fd.col(i) = (hbar(sat, w, dp, hs, hg) - hbar(sat, w, dm, hs, hg)) / (2 * step);
        fda.col(i) = (ha(dp) - ha(dm)) / (2 * step);
      }
      const Eigen::Matrix3Xd D = jacobian_D(g, w, delta, hs);
      const Eigen::Matrix3Xd Da = jacobian_Da(g, w, delta, hswa);
      d_gap = std::max(d_gap, max_abs(D - fd) / max_abs(D));
      da_gap = std::max(da_gap, max_abs(Da - fda) / max_abs(Da));
    }
  }
  r.at_most("A_s(0) = A_s0 and A_t(0) = A_t0", zero_gap, 1e-15);
  r.at_most("triad preserved under gimbal rotation", triad, 1e-12);
  r.add("J_stg, J_st, J_st,a SPD over 1e4 gimbal angles",
        min_eig > 0.0 && asym <= 1e-12, fmt("min eigenvalue %.6g, asymmetry %.2g", min_eig, asym));
  r.at_most("D vs finite differences (relative, 100 states)", d_gap, 1e-6);
  r.at_most("D_a vs finite differences (relative, 100 states)", da_gap, 1e-6);
}

// ---------------------------------------------------------------- 3

void manifold_suite(Report& r) {
  Rng rng(303);
  int bad_rank = 0, bad_dim = 0;
  double az = 0.0, mz = 0.0;
  for (const auto& [name, sat] : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    for (int k = 0; k < 1000; ++k) {
      const Eigen::VectorXd x = random_state(rng, m);
      const Eigen::VectorXd u = uniform_vector(rng, 2 * m, 0.5);
      const Eigen::MatrixXd Z = dyn.constraint_jacobian(x);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z);
      const auto& s = svd.singularValues();
      if ((s.array() > 1e-10 * s(0)).count() != 4) ++bad_rank;
      const Eigen::MatrixXd A = dyn.linearize(x, u).A;
      az = std::max(az, max_abs(A * Z.transpose()) / (max_abs(A) * max_abs(Z)));
      const TangentBasis tb = dyn.tangent_basis(x);
      mz = std::max(mz, max_abs(tb.M * Z.transpose()) / max_abs(Z));
      if (tb.M.rows() != 3 * m + 3) ++bad_dim;
    }
  }
  r.add("rank Z = 4 (2000 states)", bad_rank == 0, std::to_string(bad_rank) + " states rank deficient");
  r.at_most("A Z^T = 0 (scaled)", az, 1e-8);
  r.at_most("M Z^T = 0 (scaled)", mz, 1e-12);
  r.add("dim T_x X = 3m + 3", bad_dim == 0, std::to_string(bad_dim) + " states with another dimension");
}

// ---------------------------------------------------------------- 4

// Sum of three sinusoids per channel with zero mean.
struct SmoothSignal {
  Eigen::MatrixXd amp, freq, phase;  // 2m x 3

  SmoothSignal(Rng& rng, int m) : amp(2 * m, 3), freq(2 * m, 3), phase(2 * m, 3) {
    for (int i = 0; i < 2 * m; ++i) {
      const double bound = i < m ? 0.01 : 0.005;  // N m, gimbal then wheel
      for (int j = 0; j < 3; ++j) {
        amp(i, j) = bound / 3.0 * rng.uniform();
        freq(i, j) = 2 * kPi * rng.uniform(0.02, 0.1);
        phase(i, j) = 2 * kPi * rng.uniform();
      }
    }
  }
  Eigen::VectorXd operator()(double t) const {
    return (amp.array() * (freq.array() * t + phase.array()).sin()).rowwise().sum();
  }
};

void conservation_suite(Report& r) {
  Rng rng(404);
  const SatelliteParams sat = platforms().front().second;
  const CmgDynamics dyn(sat);
  const int m = sat.cmg_count();
  const DormandPrince rk(Tolerances{});
  double worst_h = 0.0, worst_q = 0.0, worst_gimbal = 0.0;
  const double scale = 25.0;
  for (int run = 0; run < 10; ++run) {
    Eigen::VectorXd x = random_equilibrium(rng, sat);
    const SmoothSignal u(rng, m);
    const Eigen::Vector3d h0 = Eigen::Vector3d::Zero();
    const auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = dyn.f(y, u(t)); };
    const Eigen::VectorXd delta0 = x.segment(dyn.layout().delta(), m);
    for (int k = 0; k < 180; ++k) {
      rk.integrate(rhs, k, k + 1.0, x);
      const ConstraintResidual c = dyn.constraints(x, h0);
      worst_h = std::max(worst_h, c.momentum.norm());
      worst_q = std::max(worst_q, std::abs(c.norm));
    }
    worst_gimbal = std::max(worst_gimbal, max_abs(x.segment(dyn.layout().delta(), m) - delta0));
  }
  r.at_most("|C(q) hbar| over 10 x 180 s (scale 25 N m s)", worst_h, 1e-6 * (1 + scale));
  r.at_most("| |q| - 1 |", worst_q, 1e-9);
  r.add("controls exercised the array", worst_gimbal > 0.1,
        fmt("largest gimbal excursion %.3g rad", worst_gimbal));
}

// ---------------------------------------------------------------- 5

void are_suite(Report& r) {
  Rng rng(505);
  const LqrWeights cw = LqrWeights::cost_defaults(), rw = LqrWeights::regulator_defaults();
  int bad_reduced = 0, bad_ambient = 0, unstable = 0;
  double are = 0.0, annihilate = 0.0;
  for (const auto& [name, sat] : platforms()) {
    const CmgDynamics dyn(sat);
    const int m = sat.cmg_count();
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd xd = random_equilibrium(rng, sat);
      const RegulatorDesign d = design(dyn, xd, cw, rw);
      if (controllability_rank(d.reduced.A, d.reduced.B) != 3 * m + 3) ++bad_reduced;
      const LinearizedDynamics lin = dyn.linearize(xd, Eigen::VectorXd::Zero(2 * m));
      if (controllability_rank(lin.A, lin.B) >= 3 * m + 7) ++bad_ambient;

      const Eigen::MatrixXd& M = d.basis.M;
      for (const auto& [w, P] : {std::pair{cw, &d.P_s_cost}, std::pair{rw, &d.P_s_reg}}) {
        const Eigen::MatrixXd Qs = M * assemble_Qc(w, m) * M.transpose();
        const Eigen::MatrixXd res = are_residual(d.reduced.A, d.reduced.B, Qs, assemble_R(w, m), *P);
        are = std::max(are, res.norm() / P->norm());
      }
      const Eigen::VectorXcd ev = (d.reduced.A - d.reduced.B * d.K_s_reg).eigenvalues();
      if (!(ev.real().maxCoeff() < 0.0)) ++unstable;

      const Eigen::MatrixXd Z = dyn.constraint_jacobian(xd);
      for (const Eigen::MatrixXd* mat : {&d.reg.Q, &d.reg.P, &d.reg.K, &d.cost.Q(), &d.cost.P()}) {
        annihilate = std::max(annihilate, max_abs(*mat * Z.transpose()) / (max_abs(*mat) * max_abs(Z)));
      }
    }
  }
  r.add("reduced controllability rank = 3m + 3 (20 equilibria)", bad_reduced == 0,
        std::to_string(bad_reduced) + " failures");
  r.add("ambient controllability rank < 3m + 7", bad_ambient == 0, std::to_string(bad_ambient) + " failures");
  r.at_most("ARE residual / |P_s|", are, 1e-8);
  r.add("A_s - B_s K_s Hurwitz", unstable == 0, std::to_string(unstable) + " unstable");
  r.at_most("lifted Q, P, K annihilate Z^T (scaled)", annihilate, 1e-9);
}

// ---------------------------------------------------------------- 6

void closed_loop_suite(Report& r) {
  Rng rng(606);
  const SatelliteParams sat = platforms().front().second;
  const CmgDynamics dyn(sat);
  const int m = sat.cmg_count();
  const DormandPrince rk(Tolerances{});
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd xd = random_equilibrium(rng, sat);
    const RegulatorDesign d = design(dyn, xd, LqrWeights::cost_defaults(), LqrWeights::regulator_defaults());
    const Eigen::MatrixXd& K = d.gain.K;
    const UnitQuaternion qd(Eigen::Vector4d(xd.head<4>()));
    const Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    const UnitQuaternion tilt = UnitQuaternion::from_axis_angle(axis, 1.0 * kDeg);
    Eigen::VectorXd x = xd;
    x.head<4>() = UnitQuaternion::normalized(qd.quat() * tilt.quat()).vec();
    const auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      dy = dyn.f(y, Eigen::VectorXd(-K * (y - xd)));
    };
    rk.integrate(rhs, 0.0, 120.0, x);
    worst = std::max(worst, attitude_error(UnitQuaternion::normalized(Quaternion(Eigen::Vector4d(x.head<4>()))), qd) / kDeg);
  }
  r.at_most("attitude error after 120 s from 1 deg, 10 targets (deg)", worst, 1e-3);
}

// ---------------------------------------------------------------- 7

void singularity_suite(Report& r) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(4, 25.0);
  const SrParams params = SrParams::for_wheel_momentum(h);
  for (const auto& [name, sat] : platforms()) {
    const ArrayGeometry& g = sat.geometry();
    r.at_most(name + ": sigma_min(A_t(0))", singularity_measure(g, zero), 1e-12);

    const Eigen::Matrix3Xd D = jacobian_D(g, Eigen::Vector3d::Zero(), zero, h);
    bool finite = true;
    Rng rng(707);
    for (int k = 0; k < 100; ++k) {
      const Eigen::Vector3d tau(rng.normal(), rng.normal(), rng.normal());
      finite = finite && sr_gimbal_rates(D, tau, params).allFinite();
    }
    const CmgDynamics dyn(sat);
    const Eigen::VectorXd x = State::rest(UnitQuaternion::identity(), zero, h).vec();
    const UnitQuaternion qd = UnitQuaternion::from_axis_angle(Eigen::Vector3d(1, 1, 1), kPi / 2);
    finite = finite && sr_control(dyn, x, qd, h, params).vec().allFinite();
    r.add(name + ": SR inverse finite at the singular configuration", finite, "");
  }
}

// ---------------------------------------------------------------- 8, 9

void optimizer_suite(Report& r, const Paths& p) {
  const fs::path dir = p.solve_dir;
  const nlohmann::json rep = read_json(dir / "report.json");
  const nlohmann::json timing = read_json(dir / "timing.json");

  const harness::Scenario s(harness::load_config(fs::path(p.scenarios) / "rooftop_180z.ini"));
  const harness::GuessOutcome g = harness::run_guess(s);
  const ProjectionRegulator reg = tv_regulator(s.map(), g.trajectory, {}, s.weights());

  Rng rng(808);
  Trajectory bent = g.trajectory;
  for (int k = 0; k <= bent.intervals(); ++k) {
    bent.x().col(k) += 1e-4 * uniform_vector(rng, bent.x().rows(), 1.0);
    bent.u().col(k) += 1e-3 * uniform_vector(rng, bent.u().rows(), 1.0);
  }
  const Trajectory p1 = project(s.map(), bent, reg, s.x0());
  const Trajectory p2 = project(s.map(), p1, reg, s.x0());
  r.at_most("projection idempotence", std::max(max_abs(p2.x() - p1.x()), max_abs(p2.u() - p1.u())), 1e-8);

  const Trajectory traj = project(s.map(), g.trajectory, reg, s.x0());
  const std::vector<StepLinearization> steps = linearize_steps(s.map(), traj);
  const DescentDirection dir_ = descent_direction(s.map(), traj, steps, s.design().cost, DescentOrder::kFirst);
  const double eps = 1e-4;
  const auto cost_at = [&](double gamma) {
    const Trajectory c(traj.grid(), traj.x() + gamma * dir_.z, traj.u() + gamma * dir_.v);
    return objective(project(s.map(), c, reg, s.x0()), s.design().cost);
  };
  const double fd = (cost_at(eps) - cost_at(-eps)) / (2 * eps);
  r.at_most("theta vs central FD of the projected cost (relative)", std::abs(fd - dir_.theta) / std::abs(dir_.theta), 1e-4);

  const nlohmann::json& sol = rep.at("solver");
  double prev = sol.at("initial_cost").get<double>();
  bool mono = true;
  for (const auto& it : sol.at("history")) {
    mono = mono && it.at("cost").get<double>() <= prev;
    prev = it.at("cost").get<double>();
  }
  r.add("monotone cost over the solve", mono, std::to_string(sol.at("history").size()) + " iterations");
  const double theta = std::abs(sol.at("final_theta").get<double>());
  const int iters = sol.at("iterations").get<int>();
  r.add("terminates with |theta| <= 1e-6 within 100 iterations",
        sol.at("termination") == "converged" && theta <= 1e-6 && iters <= 100,
        fmt("|theta| %.3g after ", theta) + std::to_string(iters) + " iterations");
  r.at_most("solve wall time (s)", timing.at("solve_seconds").get<double>(), 900.0);
}

void table_suite(Report& r, const Paths& p) {
  const fs::path dir = p.solve_dir;
  const nlohmann::json rep = read_json(dir / "report.json");
  const nlohmann::json& g = rep.at("guess");
  const nlohmann::json& o = rep.at("optimal");
  const auto v = [](const nlohmann::json& j, const char* k) { return j.at(k).get<double>(); };

  const double cost_ratio = v(o, "maneuver_cost") / v(g, "maneuver_cost");
  r.at_most("objective ratio optimal / guess", cost_ratio, 0.6);
  r.at_most("optimal terminal attitude error (deg)", v(o, "final_att_error_deg"), 0.2);
  r.add("optimal maneuver time < guess", v(o, "maneuver_time") < v(g, "maneuver_time"),
        fmt("%.4g s vs %.4g s", v(o, "maneuver_time"), v(g, "maneuver_time")));
  r.at_most("control effort ratio optimal / guess", v(o, "control_effort") / v(g, "control_effort"), 0.5);
  const double er = v(o, "maneuver_energy") / v(g, "maneuver_energy");
  r.add("energy ratio optimal / guess > 1", er > 1.0,
        fmt("%.3g (", er) + fmt("%.4g J vs %.4g J)", v(o, "maneuver_energy"), v(g, "maneuver_energy")));

  const harness::CheckOutcome c = harness::run_check(dir / "optimal.csv", dir / "report.json");
  r.add("report metrics recompute from the trajectory file", c.passed,
        fmt("largest relative gap %.2g", c.report.value("report_metric_gap", -1.0)));
}

// ---------------------------------------------------------------- 10

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void batch_suite(Report& r, const Paths& p) {
  const fs::path work = p.work_dir;
  fs::create_directories(work);
  const std::string configs = " --config " + (fs::path(p.scenarios) / "rooftop_180z.ini").string() +
                              " --config " + (fs::path(p.scenarios) / "pyramid_180z.ini").string();
  std::vector<std::string> reports;
  for (const char* run : {"run1", "run2"}) {
    const fs::path out = work / run;
    fs::remove_all(out);
    const std::string cmd = p.cli + " batch" + configs + " --n 3 --seed 20240611 --max-iters 3 --quiet --out-dir " +
                            out.string();
    const int rc = std::system(cmd.c_str());
    r.add(std::string("batch ") + run + " exits 0", rc == 0, cmd);
    reports.push_back(slurp(out / "batch_report.json"));
  }
  r.add("batch reports are byte-identical", !reports[0].empty() && reports[0] == reports[1],
        std::to_string(reports[0].size()) + " bytes");
  const nlohmann::json rep = nlohmann::json::parse(reports[0]);
  int ok = 0;
  for (const auto& geo : rep.at("geometries")) ok += geo.at("succeeded").get<int>();
  r.add("every maneuver ran", ok == 6, std::to_string(ok) + " of 6 succeeded");
}

struct Criterion {
  std::string title;
  double budget_seconds;
  std::function<void(Report&, const Paths&)> run;
};

const std::map<int, Criterion>& criteria() {
  static const std::map<int, Criterion> c{
      {1, {"quaternion algebra", 1.0, [](Report& r, const Paths&) { quaternion_suite(r); }}},
      {2, {"geometry and inertia", 10.0, [](Report& r, const Paths&) { geometry_suite(r); }}},
      {3, {"manifold", 30.0, [](Report& r, const Paths&) { manifold_suite(r); }}},
      {4, {"conservation", 120.0, [](Report& r, const Paths&) { conservation_suite(r); }}},
      {5, {"controllability and ARE", 60.0, [](Report& r, const Paths&) { are_suite(r); }}},
      {6, {"regulator closed loop", 120.0, [](Report& r, const Paths&) { closed_loop_suite(r); }}},
      {7, {"singular configurations", 1.0, [](Report& r, const Paths&) { singularity_suite(r); }}},
      {8, {"optimizer properties", 900.0, optimizer_suite}},
      {9, {"rooftop 180 deg table thresholds", 1800.0, table_suite}},
      {10, {"batch determinism", 2700.0, batch_suite}},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cmgtraj acceptance criteria"};
  int number = 0;
  std::vector<std::string> expected;
  Paths paths;
  app.add_option("criterion", number, "Criterion number")->required()->check(CLI::Range(1, 10));
  app.add_option("--expect-fail", expected, "Check known to fail (documented)");
  app.add_option("--cli", paths.cli, "cmgtraj executable");
  app.add_option("--scenarios", paths.scenarios, "Scenario directory");
  app.add_option("--solve-dir", paths.solve_dir, "Output of `cmgtraj solve` on the rooftop scenario");
  app.add_option("--work-dir", paths.work_dir, "Scratch directory");
  CLI11_PARSE(app, argc, argv);

  const Criterion& c = criteria().at(number);
  Report report;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(report, paths);
  } catch (const std::exception& e) {
    report.add("completed without error", false, e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.at_most("runtime (s)", seconds, c.budget_seconds);

  std::set<std::string> failed;
  for (const Check& k : report.checks()) {
    std::cout << "  " << (k.passed ? "pass" : "FAIL") << "  " << k.name;
    if (!k.detail.empty()) std::cout << ": " << k.detail;
    std::cout << "\n";
    if (!k.passed) failed.insert(k.name);
  }
  const std::set<std::string> known(expected.begin(), expected.end());
  std::cout << "criterion " << number << " [" << c.title << "]: " << (failed.empty() ? "PASS" : "FAIL");
  if (!failed.empty() && failed == known) std::cout << " (documented shortfall)";
  std::cout << "\n";
  return failed == known ? 0 : 1;
}
