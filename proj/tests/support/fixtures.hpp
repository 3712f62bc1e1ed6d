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

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "cmgtraj/array.hpp"
#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/rng.hpp"

namespace cmgtraj::testing {

inline Eigen::Matrix3d platform_inertia() {
  return Eigen::Vector3d(1500.0, 1500.0, 2000.0).asDiagonal();
}

inline SatelliteParams rooftop_platform(int m = 4) {
  return SatelliteParams(platform_inertia(), rooftop(m, std::numbers::pi / 4));
}

inline SatelliteParams pyramid_platform() {
  return SatelliteParams(platform_inertia(), pyramid(0.9553));
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double scale) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * rng.uniform(-1.0, 1.0);
  return v;
}

/// A generic (non-equilibrium) state with unit quaternion and magnitudes
/// typical of a maneuver.
inline Eigen::VectorXd random_state(Rng& rng, int m) {
  const StateLayout lay{m};
  Eigen::VectorXd x(lay.dim());
  x.segment<4>(0) = rng.unit_quaternion().vec();
  x.segment(lay.h_swr(), m) = Eigen::VectorXd::Constant(m, 25.0) + random_vector(rng, m, 2.0);
  x.segment<3>(lay.omega()) = random_vector(rng, 3, 0.02);
  x.segment(lay.delta(), m) = random_vector(rng, m, std::numbers::pi);
  x.segment(lay.h_ga(), m) = random_vector(rng, m, 0.05);
  return x;
}

inline double max_abs(const Eigen::MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace cmgtraj::testing
