#pragma once

// First-order reformulation of the plate equation. With
//   alpha = mu d_zbar(1/mu),  beta = (mu/2) d^2_zbar(1/mu)
// and U = (d^2_z d_zbar Phi, d^2_z Phi, d_z d^2_zbar Phi, d^2_zbar Phi), the
// equation P_mu(Phi) = 0 becomes (D + V) U = 0 with D = diag(dbar, dbar, d, d).

#include "vlab/complex_calculus.hpp"
#include "vlab/domain.hpp"
#include "vlab/errors.hpp"
#include "vlab/flow.hpp"
#include "vlab/wirtinger.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace vlab {

struct PotentialPair {
  ComplexField alpha;
  ComplexField beta;
};

inline PotentialPair alpha_beta(const ViscosityField& mu) {
  const Domain& d = mu.domain();
  const Eigen::VectorXd m = mu.field().values();
  const ComplexField inv(d, m.cwiseInverse().cast<cplx>());
  const Eigen::VectorXcd mc = m.cast<cplx>();
  ComplexField alpha(d, mc.cwiseProduct(wirtinger(inv, Kind::zbar, 1).values()));
  ComplexField beta(d, 0.5 * mc.cwiseProduct(wirtinger(inv, Kind::zbar, 2).values()));
  return {std::move(alpha), std::move(beta)};
}

/// 2 beta - d_zbar alpha - alpha^2 as a field.
inline ComplexField ab_identity_field(const PotentialPair& p) {
  const Eigen::VectorXcd& a = p.alpha.values();
  return ComplexField(p.alpha.domain(), 2.0 * p.beta.values() -
                                            wirtinger(p.alpha, Kind::zbar, 1).values() -
                                            a.cwiseProduct(a));
}

inline double check_ab_identity(const PotentialPair& p) {
  return ab_identity_field(p).max_abs();
}

/// V at every node.
struct MatrixField {
  Domain domain;
  std::vector<Eigen::Matrix4cd> at;
};

inline MatrixField assemble_V(const PotentialPair& p) {
  const Domain& d = p.alpha.domain();
  MatrixField v{d, std::vector<Eigen::Matrix4cd>(d.size())};
  for (Index n = 0; n < d.size(); ++n) {
    const cplx a = p.alpha[n], b = p.beta[n];
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    m.row(0) << a, b, std::conj(a), std::conj(b);
    m(1, 0) = -1.0;
    m.row(2) = m.row(0);
    m(3, 2) = -1.0;
    v.at[n] = m;
  }
  return v;
}

struct FirstOrderState {
  ComplexField u1, u2, u3, u4;
};

inline FirstOrderState lift_to_U(const ComplexField& phi) {
  return {wirtinger_mixed(phi, 2, 1), wirtinger_mixed(phi, 2, 0), wirtinger_mixed(phi, 1, 2),
          wirtinger_mixed(phi, 0, 2)};
}

inline FirstOrderState lift_to_U(const RealField& phi) { return lift_to_U(to_complex(phi)); }

/// (D + V) U, four components.
inline FirstOrderState dv_apply(const FirstOrderState& u, const MatrixField& v) {
  const Domain& d = u.u1.domain();
  FirstOrderState r{wirtinger(u.u1, Kind::zbar, 1), wirtinger(u.u2, Kind::zbar, 1),
                    wirtinger(u.u3, Kind::z, 1), wirtinger(u.u4, Kind::z, 1)};
  for (Index n = 0; n < d.size(); ++n) {
    const Eigen::Vector4cd x(u.u1[n], u.u2[n], u.u3[n], u.u4[n]);
    const Eigen::Vector4cd y = v.at[n] * x;
    r.u1[n] += y[0];
    r.u2[n] += y[1];
    r.u3[n] += y[2];
    r.u4[n] += y[3];
  }
  return r;
}

/// Max modulus of (D + V) U over nodes off the circle.
inline double dv_residual(const FirstOrderState& u, const MatrixField& v) {
  const FirstOrderState r = dv_apply(u, v);
  return std::max({interior_max(r.u1), interior_max(r.u2), interior_max(r.u3),
                   interior_max(r.u4)});
}

/// Residuals of the relations defining U from a potential:
/// dbar u2 - u1, d u4 - u3 and d^2_zbar u2 - d^2_z u4 (interior max).
struct LiftDefects {
  double d12 = 0.0, d34 = 0.0, compat = 0.0;
};

inline LiftDefects lift_defects(const FirstOrderState& u) {
  return {interior_max(wirtinger(u.u2, Kind::zbar, 1) - u.u1),
          interior_max(wirtinger(u.u4, Kind::z, 1) - u.u3),
          interior_max(wirtinger(u.u2, Kind::zbar, 2) - wirtinger(u.u4, Kind::z, 2))};
}

/// Phi with d^2_z Phi = u2 and d^2_zbar Phi = u4. The remaining relations
/// d_zbar u2 = u1 and d_z u4 = u3 must hold to `tol` relative to max |U|.
inline ComplexField potential_from_U(const FirstOrderState& u, double tol = 1e-6,
                                     int density = default_dbar_density) {
  const double scale = std::max({u.u1.max_abs(), u.u2.max_abs(), u.u3.max_abs(),
                                 u.u4.max_abs(), 1.0});
  const LiftDefects e = lift_defects(u);
  if (e.d12 > tol * scale || e.d34 > tol * scale) {
    throw IncompatibleDataError("state is not a lift: |dbar u2 - u1| = " +
                                std::to_string(e.d12) + ", |d u4 - u3| = " + std::to_string(e.d34));
  }
  return solve_bi_dbar2(u.u2, u.u4, density, tol).w;
}

/// log mu by path integration of grad log mu = (-2 Re alpha, -2 Im alpha),
/// anchored to boundary_mu at node 0. `tol` bounds the curl and the boundary
/// mismatch relative to the data.
inline ViscosityField mu_from_alpha(const ComplexField& alpha, const BoundaryTrace& boundary_mu,
                                    double tol = 1e-6) {
  const Domain& d = alpha.domain();
  const int nt = d.angular_count();
  if (boundary_mu.size() != nt || boundary_mu.dim() != 1) {
    throw ConfigError("boundary viscosity must be a scalar trace on the boundary nodes");
  }
  const RealField gx(d, -2.0 * alpha.values().real());
  const RealField gy(d, -2.0 * alpha.values().imag());
  const double scale = std::max({gx.max_abs(), gy.max_abs(), 1.0});
  const double c = curl(gx, gy).max_abs();
  if (c > tol * scale) {
    throw IncompatibleDataError("alpha is not the derivative of a real log-viscosity (curl " +
                                std::to_string(c) + ")");
  }
  const Eigen::VectorXd mb = boundary_mu.values().col(0);
  if (mb.minCoeff() <= 0.0) throw ConfigError("boundary viscosity must be positive");
  PathIntegral pi_log = [&] {
    try {
      return integrate_gradient(gx, gy, std::log(mb[0]), tol * scale);
    } catch (const MultivaluedError& e) {
      throw IncompatibleDataError(std::string("alpha has nonzero circulation: ") + e.what());
    }
  }();
  const Eigen::VectorXd m = pi_log.potential.values().array().exp().matrix();
  const double mismatch = (m.head(nt) - mb).cwiseAbs().maxCoeff() / mb.cwiseAbs().maxCoeff();
  if (mismatch > tol) {
    throw IncompatibleDataError("recovered viscosity misses the boundary trace (relative " +
                                std::to_string(mismatch) + ")");
  }
  return ViscosityField(RealField(d, m));
}

struct TransportFactor {
  ComplexField r;
  double residual = 0.0;  // interior max |2 d_zbar r - (alpha1 - alpha2) r|
};

struct TransportResult {
  TransportFactor factor;
  ComplexField discrepancy;  // equals (alpha1^2 - alpha2^2)/2 when both pairs obey the identity
};

inline TransportResult transport_factor(const PotentialPair& p1, const PotentialPair& p2,
                                        int density = default_dbar_density) {
  const Domain& d = p1.alpha.domain();
  if (!d.same_grid(p2.alpha.domain())) throw ConfigError("potentials live on different grids");
  const ComplexField da = p1.alpha - p2.alpha;
  const ComplexField s = solve_dbar(cplx(0.5) * da, Kind::zbar, 1, density);
  ComplexField r(d, s.values().array().exp().matrix());
  const double res = interior_max(cplx(2.0) * wirtinger(r, Kind::zbar, 1) - da * r);
  const ComplexField disc = cplx(2.0) * (p1.beta - p2.beta) - p2.alpha * da -
                            (wirtinger(da, Kind::zbar, 1) + cplx(0.5) * (da * da));
  return {{std::move(r), res}, disc};
}

}  // namespace vlab
