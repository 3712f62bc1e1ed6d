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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "cmgtraj/errors.hpp"

namespace cmgtraj {

struct Tolerances {
  double abs = 1e-12;
  double rel = 1e-10;
};

struct IntegrationStats {
  int accepted = 0;
  int rejected = 0;
};

/// Adaptive Dormand-Prince 5(4) with max-norm error control.
///
/// Each call integrates exactly from t0 to t1 and starts with a trial step of
/// t1 - t0, so the result is a deterministic function of (y0, t0, t1). The
/// interval may be reversed (t1 < t0) for backward sweeps.
class DormandPrince {
 public:
  explicit DormandPrince(Tolerances tol = {}, int max_steps = 200000)
      : tol_(tol), max_steps_(max_steps) {
    if (!(tol.abs > 0.0) || !(tol.rel >= 0.0)) {
      throw InvalidArgument("DormandPrince: tolerances must be positive");
    }
  }

  const Tolerances& tolerances() const { return tol_; }

  /// rhs(t, y, dy) writes dy = f(t, y). y is advanced in place. Only the
  /// leading error_dim components enter the error estimate (all if negative).
  template <class Rhs>
  IntegrationStats integrate(Rhs&& rhs, double t0, double t1, Eigen::VectorXd& y,
                             Eigen::Index error_dim = -1) const {
    IntegrationStats stats;
    const double span = t1 - t0;
    if (span == 0.0) return stats;
    const double dir = span > 0.0 ? 1.0 : -1.0;
    const double min_step = 1e-12 * std::abs(span);
    const Eigen::Index n = y.size();
    const Eigen::Index ne = error_dim < 0 ? n : std::min(error_dim, n);

    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    double t = t0;
    double h = span;
    rhs(t, y, k1);
    for (;;) {
      const double remaining = t1 - t;
      if (dir * remaining <= 0.0) break;
      bool last = false;
      if (dir * (h - remaining) >= 0.0) {
        h = remaining;
        last = true;
      }
      if (stats.accepted + stats.rejected >= max_steps_) {
        throw NumericalError("DormandPrince: step budget exhausted");
      }
      ytmp = y + h * (a21 * k1);
      rhs(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, ytmp, k6);
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + h, ynew, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double enorm = 0.0;
      for (Eigen::Index i = 0; i < ne; ++i) {
        const double sc = tol_.abs + tol_.rel * std::max(std::abs(y(i)), std::abs(ynew(i)));
        const double e = std::abs(err(i)) / sc;
        if (!(e <= enorm)) enorm = e;  // keeps NaN
      }
      if (!std::isfinite(enorm) || (ne < n && !ynew.allFinite())) {
        std::ostringstream os;
        os << "DormandPrince: non-finite state at t = " << t;
        throw NumericalError(os.str());
      }
      if (enorm <= 1.0) {
        ++stats.accepted;
        t = last ? t1 : t + h;
        y.swap(ynew);
        k1.swap(k7);
        const double fac = enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
        if (!last) h *= fac;
      } else {
        ++stats.rejected;
        h *= std::max(0.2, 0.9 * std::pow(enorm, -0.2));
        if (std::abs(h) < min_step) {
          std::ostringstream os;
          os << "DormandPrince: step size underflow at t = " << t;
          throw NumericalError(os.str());
        }
      }
    }
    return stats;
  }

 private:
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b*, the embedded fourth-order error weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Tolerances tol_;
  int max_steps_;
};

}  // namespace cmgtraj
