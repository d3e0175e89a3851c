#pragma once

// The fourth-order plate-like equation
//   P_mu(phi) = div div( (1/2mu) (hess phi - (lap phi / 2) I) ) = 0
// with clamped data (phi, phi_n), its Neumann pair (M_n, (M_t)_t), and the
// equivalent nondivergence form in Wirtinger derivatives.

#include "vlab/domain.hpp"
#include "vlab/errors.hpp"
#include "vlab/flow.hpp"
#include "vlab/lsq.hpp"
#include "vlab/wirtinger.hpp"

#include <Eigen/Dense>

namespace vlab {

struct PlateCauchyDatum {
  BoundaryTrace phi;
  BoundaryTrace phi_n;
  BoundaryTrace m_n;
  BoundaryTrace m_tt;
};

/// M = (1/2mu)(hess phi - (lap phi / 2) I).
inline SymTensorField plate_moment(const RealField& phi, const ViscosityField& mu) {
  const Domain& d = phi.domain();
  const Eigen::ArrayXd a = 0.5 / mu.field().values().array();
  const Eigen::ArrayXd h =
      0.5 * (differentiate(phi, 2, 0).values() - differentiate(phi, 0, 2).values()).array();
  const Eigen::ArrayXd c = differentiate(phi, 1, 1).values().array();
  return {RealField(d, (a * h).matrix()), RealField(d, (a * c).matrix()),
          RealField(d, (-a * h).matrix())};
}

/// Dense matrix of P_mu on the grid.
inline Eigen::MatrixXd plate_matrix(const ViscosityField& mu) {
  const Domain& d = mu.domain();
  const Eigen::MatrixXd& dxx = d.derivative_matrix(2, 0);
  const Eigen::MatrixXd& dyy = d.derivative_matrix(0, 2);
  const Eigen::MatrixXd& dxy = d.derivative_matrix(1, 1);
  const Eigen::VectorXd a = (0.5 / mu.field().values().array()).matrix();
  const Eigen::MatrixXd h = 0.5 * (dxx - dyy);
  Eigen::MatrixXd p = (dxx - dyy) * (a.asDiagonal() * h);
  p.noalias() += 2.0 * dxy * (a.asDiagonal() * dxy);
  return p;
}

/// P_mu(phi) by repeated collocation.
inline RealField apply_plate(const RealField& phi, const ViscosityField& mu) {
  const SymTensorField m = plate_moment(phi, mu);
  return differentiate(m.xx, 2, 0) + 2.0 * differentiate(m.xy, 1, 1) + differentiate(m.yy, 0, 2);
}

/// Clamped plate solver bound to one viscosity: boundary rows impose phi and
/// phi_n exactly, the equation holds in least squares at every node.
class PlateSolver {
 public:
  explicit PlateSolver(ViscosityField mu, double min_rcond = 1e-14) : mu_(std::move(mu)) {
    const Domain& d = mu_.domain();
    const Index n = d.size();
    const int nt = d.angular_count();
    Eigen::MatrixXd a = plate_matrix(mu_);
    for (Index i = 0; i < n; ++i) a.row(i) /= a.row(i).cwiseAbs().maxCoeff();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * nt, n);
    for (int k = 0; k < nt; ++k) {
      c(k, k) = 1.0;
      c.row(nt + k) = d.dr().row(k);
    }
    lsq_ = ConstrainedLeastSquares(a, c, min_rcond);
  }

  const ViscosityField& viscosity() const { return mu_; }

  RealField solve(const BoundaryTrace& phi_d, const BoundaryTrace& phin_d) const {
    const Domain& d = mu_.domain();
    const int nt = d.angular_count();
    if (phi_d.size() != nt || phin_d.size() != nt || phi_d.dim() != 1 || phin_d.dim() != 1) {
      throw ConfigError("plate data must be scalar traces on the boundary nodes");
    }
    Eigen::VectorXd bc(2 * nt);
    bc.head(nt) = phi_d.values().col(0);
    bc.tail(nt) = phin_d.values().col(0);
    return RealField(d, lsq_.solve(Eigen::VectorXd::Zero(d.size()), bc));
  }

 private:
  ViscosityField mu_;
  ConstrainedLeastSquares lsq_;
};

inline RealField solve_plate(const Domain& d, const ViscosityField& mu, const BoundaryTrace& phi_d,
                             const BoundaryTrace& phin_d) {
  if (!d.same_grid(mu.domain())) throw ConfigError("viscosity lives on a different grid");
  return PlateSolver(mu).solve(phi_d, phin_d);
}

struct NeumannPair {
  BoundaryTrace m_n;
  BoundaryTrace m_tt;
};

/// M_n = n.M n and (M_t)_t = (div M).n + (t.M n)_t on the circle.
inline NeumannPair plate_neumann(const RealField& phi, const ViscosityField& mu) {
  const Domain& d = phi.domain();
  const int nt = d.angular_count();
  const SymTensorField m = plate_moment(phi, mu);
  const RealField dx = differentiate(m.xx, 1, 0) + differentiate(m.xy, 0, 1);
  const RealField dy = differentiate(m.xy, 1, 0) + differentiate(m.yy, 0, 1);
  const FrameTrace f = boundary_frame(nt);
  Eigen::VectorXd mn(nt), tmn(nt), divn(nt);
  for (int k = 0; k < nt; ++k) {
    const double n1 = f.normal(k, 0), n2 = f.normal(k, 1);
    const double t1 = f.tangent(k, 0), t2 = f.tangent(k, 1);
    const double mx = m.xx[k] * n1 + m.xy[k] * n2;
    const double my = m.xy[k] * n1 + m.yy[k] * n2;
    mn[k] = n1 * mx + n2 * my;
    tmn[k] = t1 * mx + t2 * my;
    divn[k] = dx[k] * n1 + dy[k] * n2;
  }
  const Eigen::VectorXd mtt = divn + d.dtheta_boundary() * tmn;
  return {BoundaryTrace::scalar(mn), BoundaryTrace::scalar(mtt)};
}

/// Full plate Cauchy datum of a grid solution.
inline PlateCauchyDatum plate_cauchy_datum(const RealField& phi, const ViscosityField& mu) {
  const Domain& d = phi.domain();
  const NeumannPair np = plate_neumann(phi, mu);
  return {trace(phi), BoundaryTrace::scalar((d.dr() * phi.values()).head(d.angular_count())),
          np.m_n, np.m_tt};
}

/// Complex residual d^2_zbar d^2_z phi + alpha d^2_z d_zbar phi + beta d^2_z phi
/// + conj(alpha) d_z d^2_zbar phi + conj(beta) d^2_zbar phi.
inline ComplexField nondiv_field(const RealField& phi, const ComplexField& alpha,
                                 const ComplexField& beta) {
  const Domain& d = phi.domain();
  const ComplexField p = to_complex(phi);
  const Eigen::VectorXcd v =
      wirtinger_mixed(p, 2, 2).values() +
      alpha.values().cwiseProduct(wirtinger_mixed(p, 2, 1).values()) +
      beta.values().cwiseProduct(wirtinger_mixed(p, 2, 0).values()) +
      alpha.values().conjugate().cwiseProduct(wirtinger_mixed(p, 1, 2).values()) +
      beta.values().conjugate().cwiseProduct(wirtinger_mixed(p, 0, 2).values());
  return ComplexField(d, v);
}

/// Max modulus of the nondivergence residual over nodes off the circle.
inline double nondiv_residual(const RealField& phi, const ComplexField& alpha,
                              const ComplexField& beta) {
  return interior_max(nondiv_field(phi, alpha, beta));
}

}  // namespace vlab
