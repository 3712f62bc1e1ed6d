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

#include "cmgtraj_harness/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cmgtraj::harness {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"geometry", {"type", "m", "beta"}},
      {"inertia", {"body", "gimbal", "spin_wheel", "spin_gimbal", "transverse"}},
      {"wheels", {"h_swr"}},
      {"maneuver", {"q0", "qd", "q0_axis", "q0_angle_deg", "axis", "angle_deg"}},
      {"horizon", {"T", "dt"}},
      {"cost", {"weights", "R"}},
      {"regulator", {"weights", "R"}},
      {"guess",
       {"lambda0", "sigma_ref", "k_p", "k_d", "k_delta", "k_w", "tau_max", "rate_max"}},
      {"solver",
       {"max_iters", "theta_tol", "second_order", "second_order_switch", "riccati",
        "contraction", "armijo", "min_step"}},
      {"integrator", {"abs_tol", "rel_tol"}},
      {"run", {"seed"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

double parse_number(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite number, got '" + t + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw ConfigError(key + ": expected a bracketed list such as [1, 2, 3]");
  }
  std::vector<double> out;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, key));
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(path(key)).has_value(); }

  std::string text(const std::string& key) const {
    return trim(tree_.get<std::string>(path(key)));
  }

  void number(const std::string& key, double& out) const {
    if (has(key)) out = parse_number(text(key), key);
  }

  void integer(const std::string& key, int& out) const {
    if (!has(key)) return;
    const double v = parse_number(text(key), key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer");
    out = static_cast<int>(v);
  }

  std::vector<double> list(const std::string& key, std::size_t size) const {
    std::vector<double> v = parse_list(text(key), key);
    if (v.size() != size) {
      std::ostringstream os;
      os << key << ": expected " << size << " entries, got " << v.size();
      throw ConfigError(os.str());
    }
    return v;
  }

 private:
  static pt::ptree::path_type path(const std::string& key) { return {key, '.'}; }
  const pt::ptree& tree_;
};

UnitQuaternion read_attitude(const Reader& r, const std::string& quat_key,
                             const std::string& axis_key, const std::string& angle_key,
                             std::vector<std::string>& warnings) {
  if (r.has(quat_key) && (r.has(axis_key) || r.has(angle_key))) {
    throw ConfigError(quat_key + ": give either a quaternion or an axis and angle, not both");
  }
  if (r.has(quat_key)) {
    const std::vector<double> v = r.list(quat_key, 4);
    const Eigen::Vector4d q(v[0], v[1], v[2], v[3]);
    const double n = q.norm();
    if (!(n > 0.0)) throw ConfigError(quat_key + ": zero quaternion");
    if (std::abs(n - 1.0) > 1e-6) {
      std::ostringstream os;
      os << quat_key << ": norm " << n << " normalized on load";
      warnings.push_back(os.str());
    }
    return UnitQuaternion::normalized(Quaternion(q));
  }
  if (r.has(axis_key) != r.has(angle_key)) {
    throw ConfigError((r.has(axis_key) ? angle_key : axis_key) + ": required with " +
                      (r.has(axis_key) ? axis_key : angle_key));
  }
  if (!r.has(axis_key)) return UnitQuaternion::identity();
  const std::vector<double> a = r.list(axis_key, 3);
  const Eigen::Vector3d axis(a[0], a[1], a[2]);
  if (!(axis.norm() > 0.0)) throw ConfigError(axis_key + ": zero axis");
  double deg = 0.0;
  r.number(angle_key, deg);
  return UnitQuaternion::from_axis_angle(axis.normalized(), deg * std::numbers::pi / 180.0);
}

void read_weights(const Reader& r, const std::string& section, LqrWeights& w) {
  if (r.has(section + ".weights")) {
    const std::vector<double> v = r.list(section + ".weights", 5);
    w.q = v[0];
    w.h_swr = v[1];
    w.omega = v[2];
    w.delta = v[3];
    w.h_ga = v[4];
  }
  if (r.has(section + ".R")) {
    const std::vector<double> v = r.list(section + ".R", 2);
    w.u_g = v[0];
    w.u_w = v[1];
  }
}

void validate(const ScenarioConfig& cfg) {
  const auto wrap = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  };
  if (cfg.geometry.type != "rooftop" && cfg.geometry.type != "pyramid") {
    throw ConfigError("geometry.type: expected rooftop or pyramid, got '" + cfg.geometry.type + "'");
  }
  if (cfg.geometry.type == "pyramid" && cfg.geometry.m != 4) {
    throw ConfigError("geometry.m: a pyramid has exactly 4 CMGs");
  }
  wrap("geometry", [&] { (void)cfg.satellite(); });
  if (!(cfg.h_swr_target > 0.0)) throw ConfigError("wheels.h_swr: must be positive");
  wrap("horizon", [&] { (void)TimeGrid::over(cfg.horizon, cfg.dt); });
  wrap("cost", [&] { cfg.cost.validate(); });
  wrap("regulator", [&] { cfg.reg.validate(); });
  wrap("guess", [&] { cfg.sr_params().validate(); });
  if (!(cfg.tolerances.abs > 0.0) || !(cfg.tolerances.rel > 0.0)) {
    throw ConfigError("integrator: tolerances must be positive");
  }
  const SolverConfig& s = cfg.solver;
  if (s.max_iters < 0) throw ConfigError("solver.max_iters: must be >= 0");
  if (!(s.theta_tol > 0.0)) throw ConfigError("solver.theta_tol: must be positive");
  if (!(s.second_order_switch > 0.0)) throw ConfigError("solver.second_order_switch: must be positive");
  const LineSearchConfig& ls = s.line_search;
  if (!(ls.contraction > 0.0 && ls.contraction < 1.0)) {
    throw ConfigError("solver.contraction: must lie in (0, 1)");
  }
  if (!(ls.armijo > 0.0 && ls.armijo < 1.0)) throw ConfigError("solver.armijo: must lie in (0, 1)");
  if (!(ls.min_step > 0.0)) throw ConfigError("solver.min_step: must be positive");
}

}  // namespace

SatelliteParams ScenarioConfig::satellite() const {
  const Eigen::Matrix3d J = body_inertia.asDiagonal();
  if (geometry.type == "pyramid") return SatelliteParams(J, pyramid(geometry.beta, cmg));
  return SatelliteParams(J, rooftop(geometry.m, geometry.beta, cmg));
}

SrParams ScenarioConfig::sr_params() const {
  SrParams p = sr;
  if (!sigma_ref_set) p.sigma_ref = SrParams::for_wheel_momentum(wheel_target()).sigma_ref;
  return p;
}

Eigen::VectorXd ScenarioConfig::wheel_target() const {
  return Eigen::VectorXd::Constant(geometry.m, h_swr_target);
}

int ScenarioConfig::intervals() const { return TimeGrid::over(horizon, dt).intervals; }

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << origin << ":" << e.line() << ": " << e.message();
    throw ConfigError(os.str());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ConfigError(section + ": keys must live in a [section]");
      throw ConfigError(section + ": unknown section");
    }
    for (const auto& kv : body) {
      if (!it->second.count(kv.first)) throw ConfigError(section + "." + kv.first + ": unknown key");
    }
  }

  const Reader r(tree);
  ScenarioConfig cfg;
  if (r.has("geometry.type")) cfg.geometry.type = r.text("geometry.type");
  r.integer("geometry.m", cfg.geometry.m);
  if (!r.has("geometry.beta")) throw ConfigError("geometry.beta: required key is missing");
  r.number("geometry.beta", cfg.geometry.beta);

  if (r.has("inertia.body")) {
    const std::vector<double> b = r.list("inertia.body", 3);
    cfg.body_inertia = Eigen::Vector3d(b[0], b[1], b[2]);
  }
  r.number("inertia.gimbal", cfg.cmg.gimbal);
  r.number("inertia.spin_wheel", cfg.cmg.spin_wheel);
  r.number("inertia.spin_gimbal", cfg.cmg.spin_gimbal);
  r.number("inertia.transverse", cfg.cmg.transverse);
  r.number("wheels.h_swr", cfg.h_swr_target);

  cfg.q0 = read_attitude(r, "maneuver.q0", "maneuver.q0_axis", "maneuver.q0_angle_deg",
                         cfg.warnings);
  cfg.qd = read_attitude(r, "maneuver.qd", "maneuver.axis", "maneuver.angle_deg", cfg.warnings);

  r.number("horizon.T", cfg.horizon);
  r.number("horizon.dt", cfg.dt);
  read_weights(r, "cost", cfg.cost);
  read_weights(r, "regulator", cfg.reg);

  r.number("guess.lambda0", cfg.sr.lambda0);
  cfg.sigma_ref_set = r.has("guess.sigma_ref");
  r.number("guess.sigma_ref", cfg.sr.sigma_ref);
  r.number("guess.k_p", cfg.sr.k_p);
  r.number("guess.k_d", cfg.sr.k_d);
  r.number("guess.k_delta", cfg.sr.k_delta);
  r.number("guess.k_w", cfg.sr.k_w);
  r.number("guess.tau_max", cfg.sr.tau_max);
  r.number("guess.rate_max", cfg.sr.rate_max);

  r.integer("solver.max_iters", cfg.solver.max_iters);
  r.number("solver.theta_tol", cfg.solver.theta_tol);
  if (r.has("solver.second_order")) {
    const std::string v = r.text("solver.second_order");
    if (v != "true" && v != "false") throw ConfigError("solver.second_order: expected true or false");
    cfg.solver.second_order = v == "true";
  }
  r.number("solver.second_order_switch", cfg.solver.second_order_switch);
  if (r.has("solver.riccati")) {
    const std::string v = r.text("solver.riccati");
    if (v == "differential") {
      cfg.solver.riccati = RiccatiForm::kDifferential;
    } else if (v == "sampled") {
      cfg.solver.riccati = RiccatiForm::kSampled;
    } else {
      throw ConfigError("solver.riccati: expected differential or sampled");
    }
  }
  r.number("solver.contraction", cfg.solver.line_search.contraction);
  r.number("solver.armijo", cfg.solver.line_search.armijo);
  r.number("solver.min_step", cfg.solver.line_search.min_step);
  r.number("integrator.abs_tol", cfg.tolerances.abs);
  r.number("integrator.rel_tol", cfg.tolerances.rel);
  if (r.has("run.seed")) {
    const double s = parse_number(r.text("run.seed"), "run.seed");
    if (s < 0 || s != std::floor(s) || s > 9.007199254740992e15) {
      throw ConfigError("run.seed: expected a non-negative integer below 2^53");
    }
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

namespace {

nlohmann::json weights_json(const LqrWeights& w) {
  return {{"weights", {w.q, w.h_swr, w.omega, w.delta, w.h_ga}}, {"R", {w.u_g, w.u_w}}};
}

LqrWeights weights_from(const nlohmann::json& j) {
  const auto& w = j.at("weights");
  const auto& r = j.at("R");
  return {w.at(0), w.at(1), w.at(2), w.at(3), w.at(4), r.at(0), r.at(1)};
}

nlohmann::json quat_json(const UnitQuaternion& q) {
  return {q.vec()(0), q.vec()(1), q.vec()(2), q.vec()(3)};
}

UnitQuaternion quat_from(const nlohmann::json& j) {
  // stored values are already unit; normalizing again could move the last bit
  // and break the hash round trip
  return UnitQuaternion(Eigen::Vector4d(j.at(0).get<double>(), j.at(1).get<double>(),
                                        j.at(2).get<double>(), j.at(3).get<double>()));
}

}  // namespace

nlohmann::json to_json(const ScenarioConfig& cfg) {
  const SrParams sr = cfg.sr_params();
  const SolverConfig& s = cfg.solver;
  return {
      {"geometry", {{"type", cfg.geometry.type}, {"m", cfg.geometry.m}, {"beta", cfg.geometry.beta}}},
      {"inertia",
       {{"body", {cfg.body_inertia(0), cfg.body_inertia(1), cfg.body_inertia(2)}},
        {"gimbal", cfg.cmg.gimbal},
        {"spin_wheel", cfg.cmg.spin_wheel},
        {"spin_gimbal", cfg.cmg.spin_gimbal},
        {"transverse", cfg.cmg.transverse}}},
      {"wheels", {{"h_swr", cfg.h_swr_target}}},
      {"maneuver", {{"q0", quat_json(cfg.q0)}, {"qd", quat_json(cfg.qd)}}},
      {"horizon", {{"T", cfg.horizon}, {"dt", cfg.dt}}},
      {"cost", weights_json(cfg.cost)},
      {"regulator", weights_json(cfg.reg)},
      {"guess",
       {{"lambda0", sr.lambda0},
        {"sigma_ref", sr.sigma_ref},
        {"k_p", sr.k_p},
        {"k_d", sr.k_d},
        {"k_delta", sr.k_delta},
        {"k_w", sr.k_w},
        {"tau_max", sr.tau_max},
        {"rate_max", sr.rate_max}}},
      {"solver",
       {{"max_iters", s.max_iters},
        {"theta_tol", s.theta_tol},
        {"second_order", s.second_order},
        {"second_order_switch", s.second_order_switch},
        {"riccati", s.riccati == RiccatiForm::kSampled ? "sampled" : "differential"},
        {"contraction", s.line_search.contraction},
        {"armijo", s.line_search.armijo},
        {"min_step", s.line_search.min_step}}},
      {"integrator", {{"abs_tol", cfg.tolerances.abs}, {"rel_tol", cfg.tolerances.rel}}},
      {"run", {{"seed", cfg.seed}}},
  };
}

ScenarioConfig from_json(const nlohmann::json& j) {
  try {
    ScenarioConfig cfg;
    const auto& g = j.at("geometry");
    cfg.geometry = {g.at("type").get<std::string>(), g.at("m").get<int>(), g.at("beta").get<double>()};
    const auto& in = j.at("inertia");
    cfg.body_inertia = Eigen::Vector3d(in.at("body").at(0), in.at("body").at(1), in.at("body").at(2));
    cfg.cmg = {in.at("gimbal"), in.at("spin_wheel"), in.at("spin_gimbal"), in.at("transverse")};
    cfg.h_swr_target = j.at("wheels").at("h_swr");
    cfg.q0 = quat_from(j.at("maneuver").at("q0"));
    cfg.qd = quat_from(j.at("maneuver").at("qd"));
    cfg.horizon = j.at("horizon").at("T");
    cfg.dt = j.at("horizon").at("dt");
    cfg.cost = weights_from(j.at("cost"));
    cfg.reg = weights_from(j.at("regulator"));
    const auto& sr = j.at("guess");
    cfg.sr = {sr.at("lambda0"), sr.at("sigma_ref"), sr.at("k_p"),     sr.at("k_d"),
              sr.at("k_delta"), sr.at("k_w"),       sr.at("tau_max"), sr.at("rate_max")};
    cfg.sigma_ref_set = true;
    const auto& s = j.at("solver");
    cfg.solver.max_iters = s.at("max_iters");
    cfg.solver.theta_tol = s.at("theta_tol");
    cfg.solver.second_order = s.at("second_order");
    cfg.solver.second_order_switch = s.at("second_order_switch");
    cfg.solver.riccati =
        s.at("riccati").get<std::string>() == "sampled" ? RiccatiForm::kSampled : RiccatiForm::kDifferential;
    cfg.solver.line_search = {s.at("contraction"), s.at("armijo"), s.at("min_step")};
    cfg.tolerances = {j.at("integrator").at("abs_tol"), j.at("integrator").at("rel_tol")};
    cfg.seed = j.at("run").at("seed");
    validate(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("embedded configuration: ") + e.what());
  }
}

std::string fnv1a(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  return fnv1a(text.data(), text.size());
}

}  // namespace cmgtraj::harness
