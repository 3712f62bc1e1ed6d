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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cmgtraj/array.hpp"
#include "cmgtraj/guess.hpp"
#include "cmgtraj/integrator.hpp"
#include "cmgtraj/opt.hpp"
#include "cmgtraj/quat.hpp"
#include "cmgtraj/regulator.hpp"

namespace cmgtraj::harness {

/// Malformed or invalid scenario file. The message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct GeometryConfig {
  std::string type = "rooftop";  ///< rooftop | pyramid
  int m = 4;
  double beta = 0.0;  ///< required
};

struct ScenarioConfig {
  GeometryConfig geometry;
  Eigen::Vector3d body_inertia{1500.0, 1500.0, 2000.0};
  CmgInertia cmg;
  double h_swr_target = 25.0;
  UnitQuaternion q0 = UnitQuaternion::identity();
  UnitQuaternion qd = UnitQuaternion::identity();
  double horizon = 180.0;
  double dt = 0.05;
  LqrWeights cost = LqrWeights::cost_defaults();
  LqrWeights reg = LqrWeights::regulator_defaults();
  SrParams sr;
  bool sigma_ref_set = false;
  SolverConfig solver;
  Tolerances tolerances;
  std::uint64_t seed = 1;

  /// Notes raised while loading (normalized quaternions and the like).
  std::vector<std::string> warnings;

  SatelliteParams satellite() const;
  SrParams sr_params() const;
  Eigen::VectorXd wheel_target() const;
  int intervals() const;
};

/// Parses an INI scenario file. Omitted keys take the library defaults;
/// errors name the section.key involved.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Every effective value, including defaults.
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig from_json(const nlohmann::json& j);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a(const void* data, std::size_t size);

/// fnv1a of the compact JSON echo.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace cmgtraj::harness
