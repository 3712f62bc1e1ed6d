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

#include "cmgtraj/regulator.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cmgtraj/errors.hpp"

namespace cmgtraj {

void LqrWeights::validate() const {
  for (double w : {q, h_swr, omega, delta, h_ga}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("LqrWeights: state weights must be finite and nonnegative");
    }
  }
  if (!(u_g > 0.0) || !(u_w > 0.0) || !std::isfinite(u_g) || !std::isfinite(u_w)) {
    throw InvalidArgument("LqrWeights: control weights must be finite and positive");
  }
}

Eigen::MatrixXd assemble_Qc(const LqrWeights& w, int m) {
  w.validate();
  const StateLayout lay{m};
  Eigen::VectorXd d(lay.dim());
  d.segment<4>(0).setConstant(w.q);
  d.segment(lay.h_swr(), m).setConstant(w.h_swr);
  d.segment<3>(lay.omega()).setConstant(w.omega);
  d.segment(lay.delta(), m).setConstant(w.delta);
  d.segment(lay.h_ga(), m).setConstant(w.h_ga);
  return d.asDiagonal();
}

Eigen::MatrixXd assemble_R(const LqrWeights& w, int m) {
  w.validate();
  Eigen::VectorXd d(2 * m);
  d.head(m).setConstant(w.u_g);
  d.tail(m).setConstant(w.u_w);
  return d.asDiagonal();
}

int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rel_tol) {
  const Eigen::Index n = A.rows();
  const double scale = std::max(A.norm(), B.norm());
  if (scale == 0.0) return 0;
  Eigen::MatrixXd basis(n, 0);
  Eigen::MatrixXd w = B;
  while (basis.cols() < n && w.cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) w -= basis * (basis.transpose() * w);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > rel_tol * scale) ++r;
    r = std::min<Eigen::Index>(r, n - basis.cols());
    if (r == 0) break;
    const Eigen::MatrixXd fresh = svd.matrixU().leftCols(r);
    Eigen::MatrixXd grown(n, basis.cols() + r);
    grown << basis, fresh;
    basis.swap(grown);
    w = A * fresh;
  }
  return static_cast<int>(basis.cols());
}

Eigen::MatrixXd are_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                             const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                             const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd bp = B.transpose() * P;
  return Q - bp.transpose() * R.ldlt().solve(bp) + A.transpose() * P + P * A;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X)
  Eigen::MatrixXd kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = id(i, j) * A.transpose() + A(j, i) * id;
    }
  }
  const Eigen::Map<const Eigen::VectorXd> c(C.data(), n * n);
  const Eigen::VectorXd x = kron.partialPivLu().solve(-c);
  Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

namespace {

using Complex = std::complex<double>;

// Swap diagonal entries k and k+1 of the upper-triangular T, updating U.
void swap_adjacent(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U, Eigen::Index k) {
  const Complex a = T(k, k), b = T(k, k + 1), c = T(k + 1, k + 1);
  Complex x0 = b, x1 = c - a;
  const double nrm = std::hypot(std::abs(x0), std::abs(x1));
  if (nrm == 0.0) return;
  x0 /= nrm;
  x1 /= nrm;
  Eigen::Matrix2cd g;
  g << x0, -std::conj(x1), x1, std::conj(x0);
  T.middleRows(k, 2) = g.adjoint() * T.middleRows(k, 2);
  T.middleCols(k, 2) = T.middleCols(k, 2) * g;
  T(k + 1, k) = 0.0;
  U.middleCols(k, 2) = U.middleCols(k, 2) * g;
}

}  // namespace

Eigen::MatrixXd solve_are(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw InvalidArgument("solve_are: inconsistent matrix dimensions");
  }
  const int rank = controllability_rank(A, B);
  if (rank < n) {
    std::ostringstream os;
    os << "solve_are: pair (A, B) is not controllable (rank " << rank << " of " << n << ")";
    throw NumericalError(os.str());
  }
  const Eigen::LDLT<Eigen::MatrixXd> r_ldlt(R);
  if (r_ldlt.info() != Eigen::Success || !(r_ldlt.vectorD().array() > 0.0).all()) {
    throw InvalidArgument("solve_are: R must be positive definite");
  }
  const Eigen::MatrixXd G = B * r_ldlt.solve(B.transpose());

  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, -G, -Q, -A.transpose();
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(H);
  if (schur.info() != Eigen::Success) throw NumericalError("solve_are: Schur decomposition failed");
  Eigen::MatrixXcd T = schur.matrixT();
  Eigen::MatrixXcd U = schur.matrixU();

  const double scale = H.cwiseAbs().maxCoeff();
  Eigen::Index placed = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (T(i, i).real() < 0.0) {
      for (Eigen::Index k = i; k > placed; --k) swap_adjacent(T, U, k - 1);
      ++placed;
    }
  }
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (std::abs(T(i, i).real()) <= 1e-13 * scale) {
      throw NumericalError("solve_are: Hamiltonian has eigenvalues on the imaginary axis");
    }
  }
  if (placed != n) {
    std::ostringstream os;
    os << "solve_are: Hamiltonian has " << placed << " stable eigenvalues, expected " << n;
    throw NumericalError(os.str());
  }
  const Eigen::MatrixXcd u1 = U.topLeftCorner(n, n);
  const Eigen::MatrixXcd u2 = U.bottomLeftCorner(n, n);
  Eigen::MatrixXd P = (u1.transpose().partialPivLu().solve(u2.transpose())).transpose().real();
  P = 0.5 * (P + P.transpose());

  // Newton defect correction: (A - G P)^T dP + dP (A - G P) = -Res(P).
  for (int it = 0; it < 6; ++it) {
    const Eigen::MatrixXd res = are_residual(A, B, Q, R, P);
    if (res.norm() <= 1e-13 * std::max(1.0, P.norm())) break;
    const Eigen::MatrixXd ac = A - G * P;
    const Eigen::MatrixXd dp = solve_lyapunov(ac, res);
    P += dp;
    P = 0.5 * (P + P.transpose());
  }
  if (!P.allFinite()) throw NumericalError("solve_are: non-finite solution");
  return P;
}

LiftedMatrices lift(const Eigen::MatrixXd& P_s, const Eigen::MatrixXd& Q_s,
                    const Eigen::MatrixXd& K_s, const TangentBasis& basis) {
  const Eigen::MatrixXd& M = basis.M;
  return {M.transpose() * Q_s * M, M.transpose() * P_s * M, K_s * M};
}

CostFunctional::CostFunctional(Eigen::VectorXd x_d, Eigen::MatrixXd Q, Eigen::MatrixXd R,
                               Eigen::MatrixXd P)
    : x_d_(std::move(x_d)), Q_(std::move(Q)), R_(std::move(R)), P_(std::move(P)) {
  const Eigen::Index n = x_d_.size();
  if (Q_.rows() != n || Q_.cols() != n || P_.rows() != n || P_.cols() != n ||
      R_.rows() != R_.cols()) {
    throw InvalidArgument("CostFunctional: inconsistent matrix dimensions");
  }
}

double CostFunctional::stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const Eigen::VectorXd e = x - x_d_;
  return 0.5 * e.dot(Q_ * e) + 0.5 * u.dot(R_ * u);
}

double CostFunctional::terminal_cost(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd e = x - x_d_;
  return 0.5 * e.dot(P_ * e);
}

RegulatorDesign design(const CmgDynamics& dyn, const Eigen::VectorXd& x_d,
                       const LqrWeights& cost_weights, const LqrWeights& reg_weights) {
  const int m = dyn.cmg_count();
  const LinearizedDynamics lin =
      dyn.linearize(x_d, Eigen::VectorXd::Zero(dyn.layout().control_dim()));
  TangentBasis basis = dyn.tangent_basis(x_d);
  ReducedDynamics red = reduce(lin, basis);
  const int rank = controllability_rank(red.A, red.B);
  if (rank < red.A.rows()) {
    std::ostringstream os;
    os << "design: reduced linearization at the target is not controllable (rank " << rank
       << " of " << red.A.rows() << ")";
    throw NumericalError(os.str());
  }
  const Eigen::MatrixXd& M = basis.M;

  const Eigen::MatrixXd qc_cost = assemble_Qc(cost_weights, m);
  const Eigen::MatrixXd r_cost = assemble_R(cost_weights, m);
  const Eigen::MatrixXd qs_cost = M * qc_cost * M.transpose();
  const Eigen::MatrixXd ps_cost = solve_are(red.A, red.B, qs_cost, r_cost);

  const Eigen::MatrixXd qc_reg = assemble_Qc(reg_weights, m);
  const Eigen::MatrixXd r_reg = assemble_R(reg_weights, m);
  const Eigen::MatrixXd qs_reg = M * qc_reg * M.transpose();
  const Eigen::MatrixXd ps_reg = solve_are(red.A, red.B, qs_reg, r_reg);
  const Eigen::MatrixXd ks_reg = r_reg.ldlt().solve(red.B.transpose() * ps_reg);
  const Eigen::MatrixXd ks_cost = r_cost.ldlt().solve(red.B.transpose() * ps_cost);

  const LiftedMatrices cost_l = lift(ps_cost, qs_cost, ks_cost, basis);
  LiftedMatrices reg_l = lift(ps_reg, qs_reg, ks_reg, basis);
  FeedbackGain gain{reg_l.K};
  return RegulatorDesign{CostFunctional(x_d, cost_l.Q, r_cost, cost_l.P),
                         std::move(gain),
                         std::move(basis),
                         std::move(red),
                         ps_cost,
                         ps_reg,
                         ks_reg,
                         std::move(reg_l),
                         rank};
}

}  // namespace cmgtraj
