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

// Hot paths of the optimizer: vector field, Jacobian, one held-control step
// with and without sensitivities, the equilibrium design and the projection
// regulator sweep over a short horizon.

#include <numbers>

#include <benchmark/benchmark.h>

#include "cmgtraj/dynamics.hpp"
#include "cmgtraj/guess.hpp"
#include "cmgtraj/opt.hpp"
#include "cmgtraj/regulator.hpp"
#include "cmgtraj/rng.hpp"

using namespace cmgtraj;

namespace {

struct Fixture {
  SatelliteParams sat{Eigen::Vector3d(1500.0, 1500.0, 2000.0).asDiagonal(), rooftop(4, std::numbers::pi / 4)};
  CmgDynamics dyn{sat};
  StepMap map{dyn, 0.05};
  Eigen::VectorXd h = Eigen::VectorXd::Constant(4, 25.0);
  Eigen::VectorXd delta = find_zero_momentum_config(sat, 25.0, 1);
  UnitQuaternion qd = UnitQuaternion::from_axis_angle(Eigen::Vector3d::UnitZ(), std::numbers::pi / 6);
  Eigen::VectorXd x0 = State::rest(UnitQuaternion::identity(), delta, h).vec();
  Eigen::VectorXd xd = State::rest(qd, delta, h).vec();
  Eigen::VectorXd x;
  Eigen::VectorXd u;

  Fixture() {
    Rng rng(3);
    x = x0;
    x.segment<3>(dyn.layout().omega()) << 0.01, -0.02, 0.015;
    u.resize(8);
    for (int i = 0; i < 8; ++i) u(i) = rng.uniform(-0.1, 0.1);
  }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

void BM_VectorField(benchmark::State& st) {
  const Fixture& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(f.dyn.f(f.x, f.u));
}
BENCHMARK(BM_VectorField);

void BM_Jacobian(benchmark::State& st) {
  const Fixture& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(f.dyn.jacobian(f.x, f.u));
}
BENCHMARK(BM_Jacobian);

void BM_Step(benchmark::State& st) {
  const Fixture& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(f.map.step(f.x, f.u));
}
BENCHMARK(BM_Step);

void BM_StepSensitivities(benchmark::State& st) {
  const Fixture& f = fx();
  for (auto _ : st) benchmark::DoNotOptimize(f.map.linearize(f.x, f.u));
}
BENCHMARK(BM_StepSensitivities);

void BM_Design(benchmark::State& st) {
  const Fixture& f = fx();
  for (auto _ : st) {
    benchmark::DoNotOptimize(design(f.dyn, f.xd, LqrWeights::cost_defaults(), LqrWeights::regulator_defaults()));
  }
}
BENCHMARK(BM_Design)->Unit(benchmark::kMillisecond);

void BM_RegulatorSweep(benchmark::State& st) {
  const Fixture& f = fx();
  const RegulatorDesign d = design(f.dyn, f.xd, LqrWeights::cost_defaults(), LqrWeights::regulator_defaults());
  const RegulatorWeights w = RegulatorWeights::from_design(LqrWeights::regulator_defaults(), d, 4);
  const Trajectory guess =
      generate_guess(f.map, f.x0, f.qd, f.h, 200, SrParams::for_wheel_momentum(f.h));
  for (auto _ : st) benchmark::DoNotOptimize(tv_regulator(f.map, guess, {}, w));
}
BENCHMARK(BM_RegulatorSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
