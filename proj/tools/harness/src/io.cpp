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

#include "cmgtraj_harness/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cmgtraj::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

std::vector<std::string> column_names(int m) {
  std::vector<std::string> c{"t", "q0", "q1", "q2", "q3"};
  const auto add = [&](const std::string& stem, int count) {
    for (int i = 1; i <= count; ++i) c.push_back(stem + std::to_string(i));
  };
  add("h_swr", m);
  add("omega", 3);
  add("delta", m);
  add("h_ga", m);
  add("u_g", m);
  add("u_w", m);
  c.insert(c.end(), {"res_norm", "res_h1", "res_h2", "res_h3"});
  return c;
}

void write_trajectory(const fs::path& path, const ScenarioConfig& cfg, const std::string& kind,
                      const CmgDynamics& dyn, const Trajectory& traj) {
  const int m = dyn.cmg_count();
  const Eigen::MatrixXd res = constraint_residuals(dyn, traj, Eigen::Vector3d::Zero());
  std::ofstream out = open_out(path);
  out << "# cmgtraj trajectory\n";
  out << "# kind: " << kind << "\n";
  out << "# config_hash: " << config_hash(cfg) << "\n";
  out << "# config: " << to_json(cfg).dump() << "\n";
  out << "# units: t s, q 1, h_swr N*m*s, omega rad/s, delta rad, h_ga N*m*s, u_g N*m, "
         "u_w N*m, res_norm 1, res_h N*m*s\n";
  const std::vector<std::string> cols = column_names(m);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (int k = 0; k <= traj.intervals(); ++k) {
    out << fmt(traj.time(k));
    for (Eigen::Index i = 0; i < traj.x().rows(); ++i) out << ',' << fmt(traj.x()(i, k));
    for (Eigen::Index i = 0; i < traj.u().rows(); ++i) out << ',' << fmt(traj.u()(i, k));
    for (int i = 0; i < 4; ++i) out << ',' << fmt(res(i, k));
    out << '\n';
  }
  if (!out) throw Error(path.string() + ": write failed");
}

TrajectoryFile read_trajectory(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open");
  const auto fail = [&](int line, const std::string& what) {
    std::ostringstream os;
    os << path.string() << ":" << line << ": " << what;
    throw Error(os.str());
  };

  std::string kind, hash, config_text, line;
  std::vector<std::vector<double>> rows;
  std::size_t expected = 0;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto take = [&](const char* key, std::string& dst) {
        const std::string prefix = std::string("# ") + key + ": ";
        if (line.rfind(prefix, 0) == 0) dst = line.substr(prefix.size());
      };
      take("kind", kind);
      take("config_hash", hash);
      take("config", config_text);
      continue;
    }
    if (!header_seen) {
      if (config_text.empty()) fail(lineno, "missing '# config:' metadata line");
      header_seen = true;
      std::size_t n = 1;
      for (char c : line) n += c == ',';
      expected = n;
      continue;
    }
    std::vector<double> row;
    row.reserve(expected);
    const char* p = line.c_str();
    while (*p) {
      char* end = nullptr;
      row.push_back(std::strtod(p, &end));
      if (end == p) fail(lineno, "malformed number");
      p = end;
      if (*p == ',') ++p;
    }
    if (row.size() != expected) fail(lineno, "wrong column count");
    if (!rows.empty() && !(row[0] > rows.back()[0])) fail(lineno, "time is not strictly increasing");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw Error(path.string() + ": needs at least two samples");

  nlohmann::json cj;
  try {
    cj = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": embedded config is not valid JSON: " + e.what());
  }
  ScenarioConfig cfg = from_json(cj);
  const int m = cfg.geometry.m;
  if (expected != static_cast<std::size_t>(5 * m + 12)) {
    throw Error(path.string() + ": column count does not match the configured CMG count");
  }
  if (config_hash(cfg) != hash) throw Error(path.string() + ": config hash mismatch");

  const int N = static_cast<int>(rows.size()) - 1;
  const int n = 3 * m + 7;
  Eigen::MatrixXd x(n, N + 1), u(2 * m, N + 1), res(4, N + 1);
  for (int k = 0; k <= N; ++k) {
    const std::vector<double>& r = rows[k];
    for (int i = 0; i < n; ++i) x(i, k) = r[1 + i];
    for (int i = 0; i < 2 * m; ++i) u(i, k) = r[1 + n + i];
    for (int i = 0; i < 4; ++i) res(i, k) = r[1 + n + 2 * m + i];
  }
  const TimeGrid grid{cfg.dt, N};
  if (rows.front()[0] != 0.0 || std::abs(rows.back()[0] - grid.horizon()) > 1e-9 * grid.horizon()) {
    throw Error(path.string() + ": samples are not on the configured grid");
  }
  return {std::move(cfg), kind, hash, Trajectory(grid, std::move(x), std::move(u)),
          std::move(res)};
}

std::vector<fs::path> emit_plotdata(const TrajectoryFile& file, const fs::path& out_dir) {
  const int m = file.config.geometry.m;
  const StateLayout lay{m};
  struct Panel {
    std::string name;
    const Eigen::MatrixXd* source;
    Eigen::Index first;
    Eigen::Index count;
    std::string stem;
  };
  const Trajectory& tr = file.trajectory;
  const std::vector<Panel> panels{
      {"q", &tr.x(), 0, 4, "q"},
      {"omega", &tr.x(), lay.omega(), 3, "omega"},
      {"delta", &tr.x(), lay.delta(), m, "delta"},
      {"h_swr", &tr.x(), lay.h_swr(), m, "h_swr"},
      {"u_g", &tr.u(), lay.u_g(), m, "u_g"},
      {"u_w", &tr.u(), lay.u_w(), m, "u_w"},
  };
  std::vector<fs::path> written;
  for (const Panel& p : panels) {
    const fs::path path = out_dir / (file.kind.empty() ? p.name : file.kind + "_" + p.name) += ".dat";
    std::ofstream out = open_out(path);
    out << "# t";
    for (Eigen::Index i = 0; i < p.count; ++i) {
      out << ' ' << p.stem << (p.name == "q" ? i : i + 1);
    }
    out << "\n";
    for (int k = 0; k <= tr.intervals(); ++k) {
      out << fmt(tr.time(k));
      for (Eigen::Index i = 0; i < p.count; ++i) out << ' ' << fmt((*p.source)(p.first + i, k));
      out << '\n';
    }
    if (!out) throw Error(path.string() + ": write failed");
    written.push_back(path);
  }
  return written;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error(path.string() + ": write failed");
}

std::string state_hash(const Eigen::VectorXd& x) {
  return fnv1a(x.data(), static_cast<std::size_t>(x.size()) * sizeof(double));
}

}  // namespace cmgtraj::harness
