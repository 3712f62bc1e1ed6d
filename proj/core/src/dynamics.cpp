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

#include "cmgtraj/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cmgtraj/errors.hpp"
#include "cmgtraj/rng.hpp"

namespace cmgtraj {

State::State(int m) : layout_{m}, x_(Eigen::VectorXd::Zero(3 * m + 7)) {}

State::State(int m, Eigen::VectorXd x) : layout_{m}, x_(std::move(x)) {
  if (x_.size() != layout_.dim()) {
    std::ostringstream os;
    os << "State: expected dimension " << layout_.dim() << ", got " << x_.size();
    throw InvalidArgument(os.str());
  }
}

State State::rest(const UnitQuaternion& q, const Eigen::VectorXd& delta,
                  const Eigen::VectorXd& h_swr) {
  const int m = static_cast<int>(delta.size());
  if (h_swr.size() != m) throw InvalidArgument("State::rest: delta and h_swr sizes differ");
  State s(m);
  s.x_.segment<4>(0) = q.vec();
  s.x_.segment(s.layout_.h_swr(), m) = h_swr;
  s.x_.segment(s.layout_.delta(), m) = delta;
  return s;
}

UnitQuaternion State::attitude() const { return UnitQuaternion::normalized(Quaternion(q())); }

Control::Control(int m, Eigen::VectorXd u) : m_(m), u_(std::move(u)) {
  if (u_.size() != 2 * m) throw InvalidArgument("Control: expected dimension 2m");
}

namespace {

// Intermediate quantities shared by f and its Jacobian, evaluated in the
// dependency order delta-rate -> gimbal momentum -> body momentum -> body rate
// -> wheel momentum -> quaternion.
struct Evaluation {
  Eigen::Vector4d q;
  Eigen::VectorXd w, delta, g, ug, uw;
  Eigen::Vector3d om;

  Eigen::Matrix3Xd as, at;
  Eigen::VectorXd p, r;  // A_s^T om, A_t^T om
  Eigen::VectorXd kts, ktsg;  // Jt - Js, Jt - Jsg
  Eigen::VectorXd e;          // kts * p - w
  Eigen::VectorXd alpha, beta;

  Eigen::Matrix3d jst, ja;
  Eigen::LDLT<Eigen::Matrix3d> ja_ldlt;
  Eigen::Vector3d hb;

  Eigen::VectorXd fd, fhga, fw;
  Eigen::Vector3d fh, b, fom;
  Eigen::Vector4d fq;
};

void evaluate(const SatelliteParams& sat, const StateLayout& lay, const Eigen::VectorXd& x,
              const Eigen::VectorXd& u, const Eigen::Vector3d& tau_e, Evaluation& ev) {
  const int m = lay.m;
  const auto& geo = sat.geometry();
  const auto& in = geo.inertia();
  const auto& ag = geo.gimbal_axes();

  ev.q = x.segment<4>(0);
  ev.w = x.segment(lay.h_swr(), m);
  ev.om = x.segment<3>(lay.omega());
  ev.delta = x.segment(lay.delta(), m);
  ev.g = x.segment(lay.h_ga(), m);
  ev.ug = u.head(m);
  ev.uw = u.tail(m);

  const Eigen::ArrayXd c = ev.delta.array().cos();
  const Eigen::ArrayXd s = ev.delta.array().sin();
  ev.as.resize(3, m);
  ev.at.resize(3, m);
  for (int i = 0; i < m; ++i) {
    ev.as.col(i) = geo.spin_axes0().col(i) * c(i) - geo.transverse_axes0().col(i) * s(i);
    ev.at.col(i) = geo.transverse_axes0().col(i) * c(i) + geo.spin_axes0().col(i) * s(i);
  }
  ev.p = ev.as.transpose() * ev.om;
  ev.r = ev.at.transpose() * ev.om;
  ev.kts = in.transverse - in.spin();
  ev.ktsg = in.transverse - in.spin_gimbal;

  // gimbal rate
  ev.fd = ev.g.cwiseQuotient(in.gimbal) - ag.transpose() * ev.om;
  // absolute gimbal momentum
  ev.e = ev.kts.cwiseProduct(ev.p) - ev.w;
  ev.fhga = ev.r.cwiseProduct(ev.e) + ev.ug;

  const Eigen::Matrix3d at_jt = ev.at * in.transverse.asDiagonal() * ev.at.transpose();
  ev.jst = sat.inertia() + ev.as * in.spin().asDiagonal() * ev.as.transpose() + at_jt;
  ev.ja = sat.inertia() + ev.as * in.spin_gimbal.asDiagonal() * ev.as.transpose() + at_jt;
  ev.hb = ev.jst * ev.om + ev.as * ev.w + ag * ev.g;
  // body momentum
  ev.fh = ev.hb.cross(ev.om) + tau_e;

  // D_a f_delta = A_s alpha + A_t beta
  ev.alpha = ev.ktsg.cwiseProduct(ev.r).cwiseProduct(ev.fd);
  ev.beta = ev.e.cwiseProduct(ev.fd);
  ev.b = ev.fh - ev.as * ev.alpha - ev.at * ev.beta - ag * ev.fhga - ev.as * ev.uw;
  ev.ja_ldlt.compute(ev.ja);
  ev.fom = ev.ja_ldlt.solve(ev.b);

  // relative wheel momentum
  ev.fw = in.spin_wheel.cwiseProduct(ev.r.cwiseProduct(ev.fd) - ev.as.transpose() * ev.fom) +
          ev.uw;

  ev.fq(0) = -0.5 * ev.q.tail<3>().dot(ev.om);
  ev.fq.tail<3>() = 0.5 * (ev.q(0) * ev.om + ev.q.tail<3>().cross(ev.om));
}

}  // namespace

CmgDynamics::CmgDynamics(SatelliteParams sat)
    : sat_(std::move(sat)), layout_{sat_.cmg_count()} {}

Eigen::VectorXd CmgDynamics::f(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               const Eigen::Vector3d& tau_e) const {
  thread_local Evaluation ev;
  evaluate(sat_, layout_, x, u, tau_e, ev);
  const int m = layout_.m;
  Eigen::VectorXd dx(layout_.dim());
  dx.segment<4>(0) = ev.fq;
  dx.segment(layout_.h_swr(), m) = ev.fw;
  dx.segment<3>(layout_.omega()) = ev.fom;
  dx.segment(layout_.delta(), m) = ev.fd;
  dx.segment(layout_.h_ga(), m) = ev.fhga;
  return dx;
}

Eigen::MatrixXd CmgDynamics::jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                      const Eigen::Vector3d& tau_e) const {
  thread_local Evaluation ev;
  evaluate(sat_, layout_, x, u, tau_e, ev);
  const int m = layout_.m;
  const Eigen::Index n = layout_.dim();
  const Eigen::Index W = layout_.h_swr(), O = layout_.omega(), D = layout_.delta(),
                     G = layout_.h_ga(), UG = n + layout_.u_g(), UW = n + layout_.u_w();
  const auto& geo = sat_.geometry();
  const auto& in = geo.inertia();
  const auto& ag = geo.gimbal_axes();
  const Eigen::VectorXd inv_jg = in.gimbal.cwiseInverse();

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n + 2 * m);

  // quaternion kinematics: 0.5 O_R([0; om]) q and 0.5 O_L(q) [0; om]
  jac.block<4, 4>(0, 0) = 0.5 * right_matrix(Quaternion(0.0, ev.om));
  jac.block<4, 3>(0, O) = 0.5 * left_matrix(Quaternion(ev.q)).rightCols<3>();

  // gimbal rate
  jac.block(D, O, m, 3) = -ag.transpose();
  jac.block(D, G, m, m) = inv_jg.asDiagonal();

  // absolute gimbal momentum
  Eigen::MatrixXd dfhga = Eigen::MatrixXd::Zero(m, n + 2 * m);
  dfhga.block(0, O, m, 3) =
      ev.e.asDiagonal() * ev.at.transpose() +
      ev.r.cwiseProduct(ev.kts).asDiagonal() * ev.as.transpose();
  dfhga.block(0, D, m, m) = (ev.e.cwiseProduct(ev.p) -
                             ev.kts.cwiseProduct(ev.r).cwiseProduct(ev.r)).asDiagonal();
  dfhga.block(0, W, m, m) = (-ev.r).asDiagonal();
  dfhga.block(0, UG, m, m).setIdentity();
  jac.middleRows(G, m) = dfhga;

  // body rate: d fom = Ja^{-1} (d b - (dJa) fom)
  const Eigen::Matrix3d om_hat = hat(ev.om);
  const Eigen::Matrix3Xd dmat = [&] {
    Eigen::Matrix3Xd d = ev.as * ev.r.cwiseProduct(ev.kts).asDiagonal();
    d += ev.at * ev.e.asDiagonal();
    return d;
  }();  // D(omega, delta, h_swr)
  const Eigen::Matrix3Xd da = [&] {
    Eigen::Matrix3Xd d = ev.as * ev.r.cwiseProduct(ev.ktsg).asDiagonal();
    d += ev.at * ev.e.asDiagonal();
    return d;
  }();  // D_a(omega, delta, h_swa)

  Eigen::MatrixXd db = Eigen::MatrixXd::Zero(3, n + 2 * m);
  // omega
  db.block<3, 3>(0, O) = -om_hat * ev.jst + hat(ev.hb) -
                         (ev.as * ev.ktsg.cwiseProduct(ev.fd).asDiagonal() * ev.at.transpose() +
                          ev.at * ev.kts.cwiseProduct(ev.fd).asDiagonal() * ev.as.transpose() -
                          da * ag.transpose()) -
                         ag * dfhga.block(0, O, m, 3);
  // delta
  {
    Eigen::Matrix3Xd dad = -ev.at * ev.alpha.asDiagonal();
    dad += ev.as * (ev.ktsg.cwiseProduct(ev.fd).cwiseProduct(ev.p) + ev.beta).asDiagonal();
    dad -= ev.at * ev.kts.cwiseProduct(ev.fd).cwiseProduct(ev.r).asDiagonal();
    const Eigen::VectorXd at_fom = ev.at.transpose() * ev.fom;
    const Eigen::VectorXd as_fom = ev.as.transpose() * ev.fom;
    Eigen::Matrix3Xd dja_fom = ev.as * ev.ktsg.cwiseProduct(at_fom).asDiagonal();
    dja_fom += ev.at * ev.ktsg.cwiseProduct(as_fom).asDiagonal();
    db.block(0, D, 3, m) = -om_hat * dmat - dad - ag * dfhga.block(0, D, m, m) +
                           ev.at * ev.uw.asDiagonal() - dja_fom;
  }
  // h_swr
  db.block(0, W, 3, m) = -om_hat * ev.as + ev.at * ev.fd.asDiagonal() + ag * ev.r.asDiagonal();
  // h_ga
  db.block(0, G, 3, m) = -om_hat * ag - da * inv_jg.asDiagonal();
  // controls
  db.block(0, UG, 3, m) = -ag;
  db.block(0, UW, 3, m) = -ev.as;

  const Eigen::MatrixXd dfom = ev.ja_ldlt.solve(db);
  jac.middleRows(O, 3) = dfom;

  // relative wheel momentum
  Eigen::MatrixXd inner = -ev.as.transpose() * dfom;
  inner.block(0, O, m, 3) += ev.fd.asDiagonal() * ev.at.transpose() -
                             ev.r.asDiagonal() * ag.transpose();
  inner.block(0, D, m, m).diagonal() +=
      ev.fd.cwiseProduct(ev.p) + ev.at.transpose() * ev.fom;
  inner.block(0, G, m, m).diagonal() += ev.r.cwiseProduct(inv_jg);
  Eigen::MatrixXd dfw = in.spin_wheel.asDiagonal() * inner;
  dfw.block(0, UW, m, m).diagonal().array() += 1.0;
  jac.middleRows(W, m) = dfw;

  return jac;
}

Eigen::MatrixXd CmgDynamics::jacobian_fd(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                         double step, const Eigen::Vector3d& tau_e) const {
  const Eigen::Index n = layout_.dim();
  const Eigen::Index nu = layout_.control_dim();
  Eigen::MatrixXd jac(n, n + nu);
  Eigen::VectorXd xp = x, up = u;
  for (Eigen::Index j = 0; j < n + nu; ++j) {
    double& v = j < n ? xp(j) : up(j - n);
    const double v0 = v;
    const double h = step * std::max(1.0, std::abs(v0));
    v = v0 + h;
    const Eigen::VectorXd fp = f(xp, up, tau_e);
    v = v0 - h;
    const Eigen::VectorXd fm = f(xp, up, tau_e);
    v = v0;
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

LinearizedDynamics CmgDynamics::linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                          JacobianMode mode) const {
  const Eigen::MatrixXd jac =
      mode == JacobianMode::kAnalytic ? jacobian(x, u) : jacobian_fd(x, u);
  const Eigen::Index n = layout_.dim();
  return {jac.leftCols(n), jac.rightCols(layout_.control_dim())};
}

Eigen::Vector3d CmgDynamics::momentum(const Eigen::VectorXd& x) const {
  const int m = layout_.m;
  return hbar(sat_, x.segment<3>(layout_.omega()), x.segment(layout_.delta(), m),
              x.segment(layout_.h_swr(), m), x.segment(layout_.h_ga(), m));
}

ConstraintResidual CmgDynamics::constraints(const Eigen::VectorXd& x,
                                            const Eigen::Vector3d& h0) const {
  const Eigen::Vector4d q = x.segment<4>(0);
  return {q.norm() - 1.0, rotation_polynomial(q) * momentum(x) - h0};
}

Eigen::MatrixXd CmgDynamics::constraint_jacobian(const Eigen::VectorXd& x) const {
  const int m = layout_.m;
  const Eigen::Index n = layout_.dim();
  const Eigen::Vector4d q = x.segment<4>(0);
  const Eigen::Vector3d om = x.segment<3>(layout_.omega());
  const Eigen::VectorXd delta = x.segment(layout_.delta(), m);
  const Eigen::VectorXd w = x.segment(layout_.h_swr(), m);
  const Eigen::Vector3d hb = momentum(x);
  const FrameMatrices fr = frame_matrices(sat_.geometry(), delta);

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, n);
  z.block<1, 4>(0, 0) = q.transpose() / q.norm();
  Eigen::Matrix<double, 3, 4> hh;
  hh.col(0) = hb;
  hh.rightCols<3>() = -hat(hb);
  z.block<3, 4>(1, 0) = 2.0 * hh * left_matrix(conj(Quaternion(q)));
  z.block(1, layout_.h_swr(), 3, m) = fr.spin;
  z.block<3, 3>(1, layout_.omega()) = inertia_jst(sat_, delta);
  z.block(1, layout_.delta(), 3, m) = jacobian_D(sat_.geometry(), om, delta, w);
  z.block(1, layout_.h_ga(), 3, m) = sat_.geometry().gimbal_axes();
  return z;
}

TangentBasis CmgDynamics::tangent_basis(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd z = constraint_jacobian(x);
  const Eigen::Index n = layout_.dim();
  if (!z.allFinite()) throw NumericalError("tangent_basis: constraint Jacobian is not finite");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(3) > 1e-10 * sv(0))) {
    std::ostringstream os;
    os << "tangent_basis: constraint Jacobian is rank deficient (singular values "
       << sv.transpose() << ")";
    throw NumericalError(os.str());
  }
  Eigen::MatrixXd mt = svd.matrixV().rightCols(n - 4).transpose();
  for (Eigen::Index i = 0; i < mt.rows(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(mt(i, j)) > 1e-12) {
        if (mt(i, j) < 0.0) mt.row(i) *= -1.0;
        break;
      }
    }
  }
  return {mt};
}

Eigen::MatrixXd CmgDynamics::tangent_projector(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd z = constraint_jacobian(x);
  const Eigen::Matrix4d gram = z * z.transpose();
  const Eigen::Index n = layout_.dim();
  return Eigen::MatrixXd::Identity(n, n) - z.transpose() * gram.ldlt().solve(z);
}

ReducedDynamics reduce(const LinearizedDynamics& lin, const TangentBasis& basis) {
  return {basis.M * lin.A * basis.M.transpose(), basis.M * lin.B};
}

Eigen::VectorXd find_zero_momentum_config(const SatelliteParams& sat, double h_swr_target,
                                          std::uint64_t seed, double min_singularity,
                                          int max_attempts) {
  const auto& geo = sat.geometry();
  const int m = geo.size();
  if (m < 4) throw InvalidArgument("find_zero_momentum_config: needs at least 4 CMGs");
  const double tol = 1e-10;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  Rng rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Eigen::VectorXd delta(m);
    for (int i = 0; i < m; ++i) delta(i) = rng.uniform(-std::numbers::pi, std::numbers::pi);
    // Gauss-Newton on h A_s(delta) 1 = 0; d/ddelta (A_s 1) = -A_t.
    for (int it = 0; it < 50; ++it) {
      const FrameMatrices fr = frame_matrices(geo, delta);
      const Eigen::Vector3d res = h_swr_target * fr.spin * ones;
      if (res.norm() <= 0.1 * tol) break;
      const Eigen::Matrix3Xd jac = -h_swr_target * fr.transverse;
      delta -= jac.completeOrthogonalDecomposition().solve(res);
    }
    for (int i = 0; i < m; ++i) delta(i) = std::remainder(delta(i), 2.0 * std::numbers::pi);
    const FrameMatrices fr = frame_matrices(geo, delta);
    const double res = (h_swr_target * fr.spin * ones).norm();
    if (res <= tol && singularity_measure(geo, delta) >= min_singularity) return delta;
  }
  throw NumericalError("find_zero_momentum_config: no non-singular zero-momentum "
                       "configuration found");
}

}  // namespace cmgtraj
