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

#include "cmgtraj_harness/runs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "cmgtraj/guess.hpp"
#include "cmgtraj/rng.hpp"
#include "cmgtraj_harness/io.hpp"

namespace cmgtraj::harness {

namespace fs = std::filesystem;

namespace {

// Prefix errors with the pipeline stage, keeping their category.
template <class F>
decltype(auto) stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(name + ": " + e.what());
  } catch (const Error& e) {
    throw Error(name + ": " + e.what());
  }
}

double momentum_bound(const ScenarioConfig& cfg, const CheckBounds& b) {
  return b.momentum * (1.0 + cfg.h_swr_target);
}

struct Residuals {
  double defect = 0.0;
  double norm = 0.0;
  double momentum = 0.0;
};

Residuals residuals(const Scenario& s, const Trajectory& traj) {
  const Eigen::Vector3d h0 = s.dynamics().constraints(traj.x().col(0), Eigen::Vector3d::Zero()).momentum;
  const Eigen::MatrixXd r = constraint_residuals(s.dynamics(), traj, h0);
  Residuals out;
  out.defect = reintegration_defect(s.map(), traj);
  out.norm = r.row(0).cwiseAbs().maxCoeff();
  for (int k = 0; k < r.cols(); ++k) out.momentum = std::max(out.momentum, r.col(k).tail<3>().norm());
  return out;
}

nlohmann::json to_json(const Residuals& r) {
  return {{"reintegration_defect", r.defect}, {"max_norm_drift", r.norm}, {"max_momentum_drift", r.momentum}};
}

bool within(const Residuals& r, const ScenarioConfig& cfg, const CheckBounds& b) {
  return r.defect <= b.defect && r.norm <= b.norm && r.momentum <= momentum_bound(cfg, b);
}

nlohmann::json history_json(const SolverReport& rep) {
  nlohmann::json h = nlohmann::json::array();
  for (const IterationRecord& r : rep.history) {
    h.push_back({{"iteration", r.iteration},
                 {"cost", r.cost},
                 {"theta", r.theta},
                 {"step", r.step},
                 {"order", r.order == DescentOrder::kSecond ? "second" : "first"},
                 {"fallback", r.fallback}});
  }
  return h;
}

bool monotone(const SolverReport& rep) {
  double prev = rep.initial_cost;
  for (const IterationRecord& r : rep.history) {
    if (r.cost > prev) return false;
    prev = r.cost;
  }
  return true;
}

nlohmann::json quat_json(const UnitQuaternion& q) {
  return {q.vec()(0), q.vec()(1), q.vec()(2), q.vec()(3)};
}

std::string geometry_label(const ScenarioConfig& cfg) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s(%d, %.4g deg)", cfg.geometry.type.c_str(), cfg.geometry.m,
                cfg.geometry.beta * 180.0 / std::numbers::pi);
  return buf;
}

}  // namespace

Scenario::Scenario(ScenarioConfig cfg)
    : cfg_(std::move(cfg)),
      dyn_(cfg_.satellite()),
      map_(dyn_, cfg_.dt, cfg_.tolerances),
      delta0_(stage("setup", [&] { return find_zero_momentum_config(dyn_.params(), cfg_.h_swr_target, cfg_.seed); })),
      x0_(State::rest(cfg_.q0, delta0_, cfg_.wheel_target()).vec()),
      x_d_(State::rest(cfg_.qd, delta0_, cfg_.wheel_target()).vec()),
      design_(stage("design", [&] { return cmgtraj::design(dyn_, x_d_, cfg_.cost, cfg_.reg); })) {}

RegulatorWeights Scenario::weights() const {
  return RegulatorWeights::from_design(cfg_.reg, design_, cfg_.geometry.m);
}

RunMetrics run_metrics(const Scenario& s, const Trajectory& traj) {
  RunMetrics m;
  m.table = metrics(s.dynamics(), traj, s.design().cost);
  m.peak_body_rate = traj.x().middleRows(s.dynamics().layout().omega(), 3).cwiseAbs().maxCoeff();
  return m;
}

nlohmann::json to_json(const RunMetrics& m) {
  const ManeuverMetrics& t = m.table;
  return {{"maneuver_cost", t.maneuver_cost},
          {"control_effort", t.control_effort},
          {"maneuver_energy", t.maneuver_energy},
          {"maneuver_time", t.maneuver_time},
          {"final_att_error_deg", t.final_att_error},
          {"max_u_g", t.max_ug},
          {"max_u_w", t.max_uw},
          {"peak_body_rate", m.peak_body_rate}};
}

GuessOutcome run_guess(const Scenario& s) {
  const ScenarioConfig& cfg = s.config();
  Trajectory traj = stage("guess", [&] {
    return generate_guess(s.map(), s.x0(), cfg.qd, cfg.wheel_target(), cfg.intervals(), cfg.sr_params());
  });
  RunMetrics m = run_metrics(s, traj);
  return {std::move(traj), m};
}

SolveOutcome run_solve(const Scenario& s, std::optional<int> max_iters,
                       const IterationCallback& on_iter) {
  const ScenarioConfig& cfg = s.config();
  GuessOutcome guess = run_guess(s);
  SolverConfig sc = cfg.solver;
  if (max_iters) sc.max_iters = *max_iters;
  SolverReport rep = stage("solve", [&] {
    return solve(s.map(), s.x0(), s.design().cost, guess.trajectory, s.weights(), sc, on_iter);
  });
  const RunMetrics m = run_metrics(s, rep.trajectory);

  const CheckBounds bounds;
  const Residuals res = residuals(s, rep.trajectory);
  const std::string h0 = state_hash(s.x0());
  const bool x0_match = state_hash(guess.trajectory.x().col(0)) == h0 &&
                        state_hash(rep.trajectory.x().col(0)) == h0;
  nlohmann::json checks = {
      {"monotone_cost", monotone(rep)},
      {"converged", rep.termination == Termination::kConverged},
      {"cost_reduced", rep.final_cost < guess.metrics.table.maneuver_cost},
      {"conservation", within(res, cfg, bounds)},
      {"x0_hash_match", x0_match},
  };
  if (cfg.geometry.m == 4) {
    const double p = gimbal_pairing(s.dynamics(), rep.trajectory);
    checks["gimbal_pairing"] = {{"spread", p}, {"within_10_percent", p <= 0.1}, {"informational", true}};
  }

  nlohmann::json report = {
      {"config", harness::to_json(cfg)},
      {"config_hash", config_hash(cfg)},
      {"warnings", cfg.warnings},
      {"rng", Rng::kAlgorithm},
      {"x0_hash", h0},
      {"guess", to_json(guess.metrics)},
      {"optimal", to_json(m)},
      {"optimal_residuals", to_json(res)},
      {"solver",
       {{"max_iters", sc.max_iters},
        {"iterations", rep.history.size()},
        {"initial_cost", rep.initial_cost},
        {"final_cost", rep.final_cost},
        {"final_theta", rep.final_theta},
        {"termination", to_string(rep.termination)},
        {"message", rep.message},
        {"history", history_json(rep)}}},
      {"checks", checks},
  };
  return {std::move(guess), std::move(rep), m, std::move(report)};
}

CheckOutcome run_check(const fs::path& trajectory, const std::optional<fs::path>& report,
                       const CheckBounds& bounds) {
  const TrajectoryFile file = read_trajectory(trajectory);
  const Scenario s(file.config);
  const ScenarioConfig& cfg = s.config();
  const Trajectory& tr = file.trajectory;

  const Residuals res = residuals(s, tr);
  const Eigen::MatrixXd stored_ref = constraint_residuals(s.dynamics(), tr, Eigen::Vector3d::Zero());
  const double stored_gap = (stored_ref - file.residuals).cwiseAbs().maxCoeff();
  const RunMetrics m = run_metrics(s, tr);
  const nlohmann::json mj = to_json(m);

  bool ok = within(res, cfg, bounds) && stored_gap <= 1e-12;
  const bool x0_match = state_hash(tr.x().col(0)) == state_hash(s.x0());
  ok = ok && x0_match;

  nlohmann::json out = {
      {"file", trajectory.string()},
      {"kind", file.kind},
      {"config_hash", file.hash},
      {"samples", tr.intervals() + 1},
      {"residuals", to_json(res)},
      {"bounds",
       {{"reintegration_defect", bounds.defect},
        {"max_norm_drift", bounds.norm},
        {"max_momentum_drift", momentum_bound(cfg, bounds)}}},
      {"stored_residual_gap", stored_gap},
      {"x0_hash_match", x0_match},
      {"metrics", mj},
  };

  if (report) {
    std::ifstream in(*report);
    if (!in) throw Error(report->string() + ": cannot open");
    nlohmann::json rj;
    try {
      rj = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(report->string() + ": " + e.what());
    }
    const std::string block = file.kind == "guess" ? "guess" : "optimal";
    if (!rj.contains(block) || rj.value("config_hash", "") != file.hash) {
      throw ValidationError(report->string() + ": report does not describe this trajectory");
    }
    double worst = 0.0;
    for (const auto& [key, value] : mj.items()) {
      const double ref = rj.at(block).at(key).get<double>();
      worst = std::max(worst, std::abs(value.get<double>() - ref) / std::max(1.0, std::abs(ref)));
    }
    out["report_metric_gap"] = worst;
    ok = ok && worst <= bounds.metrics;
  }
  out["passed"] = ok;
  return {std::move(out), ok};
}

double gimbal_pairing(const CmgDynamics& dyn, const Trajectory& traj) {
  if (dyn.cmg_count() != 4) throw InvalidArgument("gimbal_pairing: needs four CMGs");
  const Eigen::MatrixXd d = traj.x().middleRows(dyn.layout().delta(), 4);
  const Eigen::MatrixXd e = d.colwise() - d.col(0);
  const auto rms = [](const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / v.size()); };
  double worst = 0.0;
  for (const auto& [a, b] : {std::pair{0, 2}, std::pair{1, 3}}) {
    const Eigen::VectorXd ea = e.row(a).transpose(), eb = e.row(b).transpose();
    const double scale = std::max(rms(ea), rms(eb));
    if (scale == 0.0) continue;
    worst = std::max(worst, std::min(rms(ea - eb), rms(ea + eb)) / scale);
  }
  return worst;
}

nlohmann::json run_batch(const std::vector<ScenarioConfig>& cfgs, int n, std::uint64_t seed,
                         std::optional<int> max_iters, const BatchProgress& progress) {
  if (n < 1) throw InvalidArgument("batch: n must be >= 1");
  if (cfgs.empty()) throw InvalidArgument("batch: no configuration");

  struct Draw {
    UnitQuaternion q0, qd;
    std::uint64_t seed;
  };
  Rng rng(seed);
  std::vector<Draw> draws;
  for (int i = 0; i < n; ++i) {
    const UnitQuaternion q0 = rng.unit_quaternion();
    const UnitQuaternion qd = rng.unit_quaternion();
    draws.push_back({q0, qd, rng.next_seed()});
  }

  static const char* const kColumns[] = {"maneuver_cost", "control_effort", "maneuver_energy",
                                         "maneuver_time", "final_att_error_deg"};
  nlohmann::json geometries = nlohmann::json::array();
  nlohmann::json table = nlohmann::json::array();
  for (const ScenarioConfig& base : cfgs) {
    const std::string label = geometry_label(base);
    nlohmann::json runs = nlohmann::json::array();
    std::map<std::string, double> sum_guess, sum_opt;
    int ok = 0;
    for (int i = 0; i < n; ++i) {
      ScenarioConfig cfg = base;
      cfg.q0 = draws[i].q0;
      cfg.qd = draws[i].qd;
      cfg.seed = draws[i].seed;
      nlohmann::json run = {{"index", i}, {"q0", quat_json(cfg.q0)}, {"qd", quat_json(cfg.qd)},
                            {"gimbal_seed", cfg.seed},
                            {"slew_deg", attitude_error(cfg.q0, cfg.qd) * 180.0 / std::numbers::pi}};
      if (progress) progress(label + ": maneuver " + std::to_string(i + 1) + "/" + std::to_string(n));
      try {
        const Scenario s(cfg);
        const SolveOutcome r = run_solve(s, max_iters);
        run["guess"] = r.report.at("guess");
        run["optimal"] = r.report.at("optimal");
        run["iterations"] = r.solver.history.size();
        run["final_theta"] = r.solver.final_theta;
        run["termination"] = to_string(r.solver.termination);
        run["status"] = "ok";
        for (const char* c : kColumns) {
          sum_guess[c] += run["guess"][c].get<double>();
          sum_opt[c] += run["optimal"][c].get<double>();
        }
        ++ok;
      } catch (const Error& e) {
        run["status"] = "failed";
        run["error"] = e.what();
      }
      runs.push_back(std::move(run));
    }

    nlohmann::json g = {{"geometry", label}, {"config_hash", config_hash(base)},
                        {"succeeded", ok}, {"failed", n - ok}, {"maneuvers", runs}};
    if (ok > 0) {
      nlohmann::json rg = {{"geometry", label}, {"method", "guess"}, {"count", ok}};
      nlohmann::json ro = {{"geometry", label}, {"method", "optimal"}, {"count", ok}};
      for (const char* c : kColumns) {
        rg[c] = sum_guess[c] / ok;
        ro[c] = sum_opt[c] / ok;
      }
      g["checks"] = {{"mean_cost_reduced", ro["maneuver_cost"] < rg["maneuver_cost"]},
                     {"mean_time_reduced", ro["maneuver_time"] < rg["maneuver_time"]}};
      table.push_back(std::move(rg));
      table.push_back(std::move(ro));
    }
    geometries.push_back(std::move(g));
  }

  nlohmann::json configs = nlohmann::json::array();
  for (const ScenarioConfig& c : cfgs) configs.push_back(harness::to_json(c));
  return {{"n", n},
          {"seed", seed},
          {"rng", Rng::kAlgorithm},
          {"max_iters_override", max_iters ? nlohmann::json(*max_iters) : nlohmann::json()},
          {"configs", configs},
          {"table", table},
          {"geometries", geometries}};
}

}  // namespace cmgtraj::harness
