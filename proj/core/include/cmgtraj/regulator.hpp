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

#include <Eigen/Dense>

#include "cmgtraj/dynamics.hpp"

namespace cmgtraj {

/// Scalar weights of the diagonal state and control penalties.
struct LqrWeights {
  double q = 1.0;
  double h_swr = 1.0;
  double omega = 1.0;
  double delta = 1.0;
  double h_ga = 1.0;
  double u_g = 1.0;
  double u_w = 1.0;

  /// Weights of the maneuver objective.
  static LqrWeights cost_defaults() { return {5.0, 10.0, 0.1, 0.01, 50.0, 1.0, 1.0}; }
  /// Weights of the projection regulator used by the optimizer.
  static LqrWeights regulator_defaults() {
    return {3.0, 3e-4, 2e-2, 3e-5, 3e-4, 1e-5, 3e-5};
  }

  /// Throws InvalidArgument unless state weights are >= 0 and control weights > 0.
  void validate() const;
};

/// diag([rho_q 1_4; rho_hswr 1_m; rho_w 1_3; rho_delta 1_m; rho_hga 1_m]).
Eigen::MatrixXd assemble_Qc(const LqrWeights& w, int m);
/// diag([rho_ug 1_m; rho_uw 1_m]).
Eigen::MatrixXd assemble_R(const LqrWeights& w, int m);

/// Dimension of the reachable subspace of (A, B). Block Krylov iteration with
/// re-orthogonalization; a direction counts when its residual singular value
/// exceeds rel_tol times the largest singular value seen.
int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         double rel_tol = 1e-10);

/// Q - P B R^{-1} B^T P + A^T P + P A.
Eigen::MatrixXd are_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                             const Eigen::MatrixXd& P);

/// Stabilizing solution of the continuous-time algebraic Riccati equation.
///
/// Ordered complex Schur form of the Hamiltonian followed by Newton defect
/// correction. Throws NumericalError if (A, B) is not controllable or the
/// Hamiltonian has no n-dimensional stable invariant subspace.
Eigen::MatrixXd solve_are(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Solves A^T X + X A = -C for X.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

struct LiftedMatrices {
  Eigen::MatrixXd Q;  ///< M^T Q_s M
  Eigen::MatrixXd P;  ///< M^T P_s M
  Eigen::MatrixXd K;  ///< K_s M
};

LiftedMatrices lift(const Eigen::MatrixXd& P_s, const Eigen::MatrixXd& Q_s,
                    const Eigen::MatrixXd& K_s, const TangentBasis& basis);

/// Quadratic stage and terminal costs about a target state.
class CostFunctional {
 public:
  CostFunctional(Eigen::VectorXd x_d, Eigen::MatrixXd Q, Eigen::MatrixXd R, Eigen::MatrixXd P);

  const Eigen::VectorXd& target() const { return x_d_; }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& R() const { return R_; }
  const Eigen::MatrixXd& P() const { return P_; }

  /// 1/2 |x - x_d|_Q^2 + 1/2 |u|_R^2.
  double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  /// 1/2 |x - x_d|_P^2.
  double terminal_cost(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd x_d_;
  Eigen::MatrixXd Q_, R_, P_;
};

struct FeedbackGain {
  Eigen::MatrixXd K;  ///< u = -K (x - x_d)
};

/// Everything produced by the design at one target, including the reduced
/// quantities used by checks and by the time-varying regulator.
struct RegulatorDesign {
  CostFunctional cost;
  FeedbackGain gain;
  TangentBasis basis;
  ReducedDynamics reduced;
  Eigen::MatrixXd P_s_cost, P_s_reg;
  Eigen::MatrixXd K_s_reg;
  LiftedMatrices reg;  ///< lifted regulator Q, P, K
  int controllability = 0;
};

/// linearize -> tangent_basis -> reduce -> ARE -> lift, once with the cost
/// weights (objective) and once with the regulator weights (gain).
RegulatorDesign design(const CmgDynamics& dyn, const Eigen::VectorXd& x_d,
                       const LqrWeights& cost_weights, const LqrWeights& reg_weights);

}  // namespace cmgtraj
