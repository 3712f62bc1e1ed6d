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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/trajectory.hpp"
#include "cmgtraj_harness/config.hpp"

namespace cmgtraj::harness {

/// Trajectory CSV: `#` metadata lines (kind, config hash, config echo, units),
/// a column-name line, then one row per sample:
/// t, q(4), h_swr(m), omega(3), delta(m), h_ga(m), u_g(m), u_w(m), residuals(4).
struct TrajectoryFile {
  ScenarioConfig config;
  std::string kind;
  std::string hash;
  Trajectory trajectory;
  Eigen::MatrixXd residuals;  ///< 4 x (N+1) as stored
};

std::vector<std::string> column_names(int m);

void write_trajectory(const std::filesystem::path& path, const ScenarioConfig& cfg,
                      const std::string& kind, const CmgDynamics& dyn, const Trajectory& traj);

/// Throws Error with the line number on malformed input.
TrajectoryFile read_trajectory(const std::filesystem::path& path);

/// One whitespace-separated file per panel (q, omega, delta, h_swr, u_g, u_w).
std::vector<std::filesystem::path> emit_plotdata(const TrajectoryFile& file,
                                                 const std::filesystem::path& out_dir);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// FNV-1a of the raw bytes of a vector, as 16 hex digits.
std::string state_hash(const Eigen::VectorXd& x);

}  // namespace cmgtraj::harness
