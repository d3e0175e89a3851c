#pragma once

// Dictionary between Stokes Cauchy data (g, sigma n) and plate Cauchy data
// (phi, phi_n, M_n, (M_t)_t), plus the interior constructions behind it.
//
// Conventions: t = (-n2, n1), R_perp v = (v2, -v1), sigma = R hess(phi) so
// sigma11 = phi_22, sigma12 = -phi_12, sigma22 = phi_11 and p = -lap(phi)/2.
// Every path integral starts at boundary node 0 and runs counterclockwise;
// unspecified constants are pinned to zero there.

#include "vlab/domain.hpp"
#include "vlab/errors.hpp"
#include "vlab/flow.hpp"
#include "vlab/plate.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

namespace vlab {

// ---------------------------------------------------------------------------
// Interior constructions

struct AiryAnchor {
  double value = 0.0;
  Vec2 gradient{};
};

struct AiryResult {
  RealField phi;
  double div_residual = 0.0;   // max |div sigma| / max(1, max |sigma|)
  double path_mismatch = 0.0;  // worst of the three path integrations
};

/// Airy stress function of a solved Stokes state. Throws
/// IncompatibleDataError when div sigma is not small relative to sigma.
inline AiryResult airy_from_stokes(const FlowState& s, const ViscosityField& mu,
                                   AiryAnchor anchor = {}, double tol = 1e-4) {
  const SymTensorField sig = stress(s, mu);
  const RealField d1 = differentiate(sig.xx, 1, 0) + differentiate(sig.xy, 0, 1);
  const RealField d2 = differentiate(sig.xy, 1, 0) + differentiate(sig.yy, 0, 1);
  const double scale = std::max({1.0, sig.xx.max_abs(), sig.xy.max_abs(), sig.yy.max_abs()});
  const double res = std::max(d1.max_abs(), d2.max_abs()) / scale;
  if (res > tol) {
    throw IncompatibleDataError("stress is not divergence free (relative residual " +
                                std::to_string(res) + "); stress potentials would be path dependent");
  }
  // grad(phi_1) = (phi_11, phi_12) = (sigma22, -sigma12), grad(phi_2) = (-sigma12, sigma11).
  RealField m12 = sig.xy;
  m12 *= -1.0;
  const PathIntegral p1 = integrate_gradient(sig.yy, m12, anchor.gradient.x, 1.0);
  const PathIntegral p2 = integrate_gradient(m12, sig.xx, anchor.gradient.y, 1.0);
  const PathIntegral ph = integrate_gradient(p1.potential, p2.potential, anchor.value, 1.0);
  return {ph.potential, res, std::max({p1.path_mismatch, p2.path_mismatch, ph.path_mismatch})};
}

struct StrainAnchor {
  Vec2 velocity{};
  double vorticity = 0.0;  // u2,1 - u1,2 at node 0
};

/// Velocity with symmetric gradient eps (Cesaro integration), rigid part
/// pinned by the anchor. Rejects eps that is not trace free or violates
/// eps22,11 + eps11,22 - 2 eps12,12 = 0 beyond tol (relative to max |eps|).
inline VectorField velocity_from_strain(const SymTensorField& eps, StrainAnchor anchor = {},
                                        double tol = 1e-6) {
  const double scale = std::max({1.0, eps.xx.max_abs(), eps.xy.max_abs(), eps.yy.max_abs()});
  const double tr = (eps.xx + eps.yy).max_abs() / scale;
  if (tr > tol) {
    throw IncompatibleDataError("strain is not trace free (relative " + std::to_string(tr) + ")");
  }
  const RealField sv = differentiate(eps.yy, 2, 0) + differentiate(eps.xx, 0, 2) -
                       2.0 * differentiate(eps.xy, 1, 1);
  if (sv.max_abs() / scale > tol) {
    throw IncompatibleDataError("strain violates Saint-Venant compatibility (relative " +
                                std::to_string(sv.max_abs() / scale) + ")");
  }
  const RealField w1 = 2.0 * differentiate(eps.xy, 1, 0) - 2.0 * differentiate(eps.xx, 0, 1);
  const RealField w2 = 2.0 * differentiate(eps.yy, 1, 0) - 2.0 * differentiate(eps.xy, 0, 1);
  const RealField omega = integrate_gradient(w1, w2, anchor.vorticity, 1.0).potential;
  RealField half = omega;
  half *= 0.5;
  const RealField u1 = integrate_gradient(eps.xx, eps.xy - half, anchor.velocity.x, 1.0).potential;
  const RealField u2 = integrate_gradient(eps.xy + half, eps.yy, anchor.velocity.y, 1.0).potential;
  return {u1, u2};
}

// ---------------------------------------------------------------------------
// Boundary bridges

struct DirichletPlateData {
  BoundaryTrace phi;
  BoundaryTrace phi_n;
};

/// Traction -> (phi, phi_n): integrate (phi_1)_t = -T2, (phi_2)_t = T1, then
/// phi_t = grad(phi).t. Zero net force or torque is required for single
/// valuedness; violations raise MultivaluedError.
inline DirichletPlateData dirichlet_bridge_forward(const BoundaryTrace& traction,
                                                   AiryAnchor anchor = {}, double tol = 1e-6) {
  if (traction.dim() != 2) throw ConfigError("traction must be a 2-vector trace");
  const auto nt = static_cast<int>(traction.size());
  const FrameTrace f = boundary_frame(nt);
  const BoundaryTrace dgrad = BoundaryTrace::vector(-traction.component(1), traction.component(0));
  Eigen::Vector2d g0(anchor.gradient.x, anchor.gradient.y);
  const BoundaryTrace grad = integrate_trace(dgrad, 0, g0, tol);
  const Eigen::VectorXd phin = project(grad, f.normal);
  const Eigen::VectorXd phit = project(grad, f.tangent);
  const BoundaryTrace phi = integrate_trace(BoundaryTrace::scalar(phit), 0, anchor.value, tol);
  return {phi, BoundaryTrace::scalar(phin)};
}

/// (phi, phi_n) -> traction sigma n = R_perp (hess phi) t.
inline BoundaryTrace dirichlet_bridge_backward(const DirichletPlateData& data) {
  const auto nt = static_cast<int>(data.phi.size());
  const FrameTrace f = boundary_frame(nt);
  const Eigen::VectorXd phit = tangential_derivative(data.phi).component(0);
  const Eigen::VectorXd phin = data.phi_n.component(0);
  const Eigen::VectorXd g1 = phin.cwiseProduct(f.normal.col(0)) + phit.cwiseProduct(f.tangent.col(0));
  const Eigen::VectorXd g2 = phin.cwiseProduct(f.normal.col(1)) + phit.cwiseProduct(f.tangent.col(1));
  const BoundaryTrace ht = tangential_derivative(BoundaryTrace::vector(g1, g2));
  return BoundaryTrace::vector(ht.component(1), -ht.component(0));
}

struct NeumannPlateData {
  BoundaryTrace m_n;
  BoundaryTrace m_tt;
  BoundaryTrace m_t;
};

/// Velocity trace -> (M_n, (M_t)_t) via u_t = -M_t n + M_n t.
inline NeumannPlateData neumann_bridge_forward(const BoundaryTrace& g) {
  if (g.dim() != 2) throw ConfigError("velocity must be a 2-vector trace");
  const auto nt = static_cast<int>(g.size());
  const FrameTrace f = boundary_frame(nt);
  const BoundaryTrace ut = tangential_derivative(g);
  const Eigen::VectorXd mt = -project(ut, f.normal);
  const Eigen::VectorXd mn = project(ut, f.tangent);
  const BoundaryTrace mtt = tangential_derivative(BoundaryTrace::scalar(mt));
  return {BoundaryTrace::scalar(mn), mtt, BoundaryTrace::scalar(mt)};
}

struct NeumannAnchor {
  double m_t = 0.0;  // M_t at node 0
  Vec2 velocity{};   // u at node 0
};

/// M_t at node 0 that makes the reconstructed vorticity equal omega0, given
/// t.(M n) at node 0: M_t = omega/2 + t.M n.
inline double m_t_anchor_for_vorticity(double omega0, double t_m_n0) {
  return 0.5 * omega0 + t_m_n0;
}

/// (M_n, (M_t)_t) -> velocity trace, integrating (M_t)_t and then
/// u_t = -M_t n + M_n t. Nonzero circulation raises MultivaluedError.
inline BoundaryTrace neumann_bridge_backward(const BoundaryTrace& m_n, const BoundaryTrace& m_tt,
                                             NeumannAnchor anchor = {}, double tol = 1e-6) {
  const auto nt = static_cast<int>(m_n.size());
  const FrameTrace f = boundary_frame(nt);
  const Eigen::VectorXd mt = integrate_trace(m_tt, 0, anchor.m_t, tol).component(0);
  const Eigen::VectorXd mn = m_n.component(0);
  const Eigen::VectorXd u1 = -mt.cwiseProduct(f.normal.col(0)) + mn.cwiseProduct(f.tangent.col(0));
  const Eigen::VectorXd u2 = -mt.cwiseProduct(f.normal.col(1)) + mn.cwiseProduct(f.tangent.col(1));
  Eigen::Vector2d u0(anchor.velocity.x, anchor.velocity.y);
  return integrate_trace(BoundaryTrace::vector(u1, u2), 0, u0, tol);
}

/// Removes the best-fit rigid motion c + w (-y, x) from a velocity trace.
inline BoundaryTrace remove_rigid_motion(const BoundaryTrace& g) {
  const auto nt = static_cast<int>(g.size());
  Eigen::MatrixXd basis(2 * nt, 3);
  Eigen::VectorXd v(2 * nt);
  for (int k = 0; k < nt; ++k) {
    const double th = 2.0 * pi * k / nt;
    basis.row(k) << 1.0, 0.0, -std::sin(th);
    basis.row(nt + k) << 0.0, 1.0, std::cos(th);
    v[k] = g.values()(k, 0);
    v[nt + k] = g.values()(k, 1);
  }
  const Eigen::VectorXd c = basis.colPivHouseholderQr().solve(v);
  const Eigen::VectorXd r = v - basis * c;
  return BoundaryTrace::vector(r.head(nt), r.tail(nt));
}

// ---------------------------------------------------------------------------
// Boundary jets

/// All partial derivatives of phi up to order 3 on the circle. Columns:
/// phi, phi_1, phi_2, phi_11, phi_12, phi_22, phi_111, phi_112, phi_122, phi_222.
struct BoundaryJet {
  Eigen::MatrixXd values;

  static constexpr std::array<const char*, 10> names{
      "phi", "phi_1", "phi_2", "phi_11", "phi_12", "phi_22", "phi_111", "phi_112", "phi_122", "phi_222"};
  Eigen::VectorXd column(int c) const { return values.col(c); }
};

/// Jet of a grid field, read off by collocation derivatives.
inline BoundaryJet jet_of(const RealField& phi) {
  static constexpr int orders[10][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                        {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  const int nt = phi.domain().angular_count();
  BoundaryJet j{Eigen::MatrixXd(nt, 10)};
  for (int c = 0; c < 10; ++c) {
    j.values.col(c) = boundary_values(differentiate(phi, orders[c][0], orders[c][1]));
  }
  return j;
}

/// Max mismatch between the tangential derivative of each order 0..2 trace
/// and the next-order traces contracted with t.
inline double jet_consistency(const BoundaryJet& j) {
  const auto nt = static_cast<int>(j.values.rows());
  const FrameTrace f = boundary_frame(nt);
  const Eigen::MatrixXd dt = spectral::fourier_diff_matrix(nt) * j.values.leftCols(6);
  const Eigen::VectorXd t1 = f.tangent.col(0), t2 = f.tangent.col(1);
  auto contract = [&](int a, int b) {
    return Eigen::VectorXd(j.values.col(a).cwiseProduct(t1) + j.values.col(b).cwiseProduct(t2));
  };
  double worst = 0.0;
  const int pairs[6][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}, {3, 6, 7}, {4, 7, 8}, {5, 8, 9}};
  for (const auto& p : pairs) {
    worst = std::max(worst, (dt.col(p[0]) - contract(p[1], p[2])).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Local matrix of the second-order jet system at normal n (unknowns
/// phi_11, phi_12, phi_22; rows: two tangential derivatives, 4 mu M_n).
inline Eigen::Matrix3d second_order_matrix(double n1, double n2) {
  Eigen::Matrix3d m;
  m << -n2, n1, 0.0,
       0.0, -n2, n1,
       n1 * n1 - n2 * n2, 4.0 * n1 * n2, n2 * n2 - n1 * n1;
  return m;
}

/// Local matrix of the third-order jet system at normal n (unknowns
/// phi_111, phi_112, phi_122, phi_222; rows: three tangential derivatives and
/// the normal component of div M scaled by 4 mu).
inline Eigen::Matrix4d third_order_matrix(double n1, double n2) {
  Eigen::Matrix4d m;
  m << -n2, n1, 0.0, 0.0,
       0.0, -n2, n1, 0.0,
       0.0, 0.0, -n2, n1,
       n1, n2, n1, n2;
  return m;
}

struct ViscosityJet {
  Eigen::VectorXd mu;
  Eigen::VectorXd mu_x;
  Eigen::VectorXd mu_y;

  static ViscosityJet of(const ViscosityField& m) {
    const BoundaryTrace g = m.boundary_gradient();
    return {m.boundary_value().component(0), g.component(0), g.component(1)};
  }
};

/// Boundary jet of phi up to order 3 from plate Cauchy data and the boundary
/// jet of mu, by per-node 3x3 and 4x4 solves.
inline BoundaryJet recover_boundary_jets(const PlateCauchyDatum& datum, const ViscosityJet& mj,
                                         double min_abs_det = 1e-8) {
  const auto nt = static_cast<int>(datum.phi.size());
  const FrameTrace f = boundary_frame(nt);
  const Eigen::MatrixXd fd = spectral::fourier_diff_matrix(nt);
  BoundaryJet j{Eigen::MatrixXd(nt, 10)};
  j.values.col(0) = datum.phi.component(0);
  const Eigen::VectorXd phit = fd * j.values.col(0);
  const Eigen::VectorXd phin = datum.phi_n.component(0);
  j.values.col(1) = phin.cwiseProduct(f.normal.col(0)) + phit.cwiseProduct(f.tangent.col(0));
  j.values.col(2) = phin.cwiseProduct(f.normal.col(1)) + phit.cwiseProduct(f.tangent.col(1));

  const Eigen::VectorXd d1 = fd * j.values.col(1);
  const Eigen::VectorXd d2 = fd * j.values.col(2);
  for (int k = 0; k < nt; ++k) {
    const Eigen::Matrix3d m = second_order_matrix(f.normal(k, 0), f.normal(k, 1));
    if (std::abs(m.determinant()) < min_abs_det) throw SolverError("singular second-order jet system");
    const Eigen::Vector3d rhs(d1[k], d2[k], 4.0 * mj.mu[k] * datum.m_n.values()(k, 0));
    j.values.block(k, 3, 1, 3) = m.partialPivLu().solve(rhs).transpose();
  }

  // S = hess - (lap / 2) I, a = 1 / (2 mu), grad a = -grad mu / (2 mu^2).
  Eigen::VectorXd tan_asn(nt), s_grada_n(nt);
  for (int k = 0; k < nt; ++k) {
    const double n1 = f.normal(k, 0), n2 = f.normal(k, 1);
    const double t1 = f.tangent(k, 0), t2 = f.tangent(k, 1);
    const double p11 = j.values(k, 3), p12 = j.values(k, 4), p22 = j.values(k, 5);
    const double h = 0.5 * (p11 - p22);
    const double a = 0.5 / mj.mu[k];
    const double ax = -mj.mu_x[k] / (2.0 * mj.mu[k] * mj.mu[k]);
    const double ay = -mj.mu_y[k] / (2.0 * mj.mu[k] * mj.mu[k]);
    const double sn1 = h * n1 + p12 * n2, sn2 = p12 * n1 - h * n2;
    tan_asn[k] = a * (t1 * sn1 + t2 * sn2);
    s_grada_n[k] = (h * ax + p12 * ay) * n1 + (p12 * ax - h * ay) * n2;
  }
  const Eigen::VectorXd d_tasn = fd * tan_asn;
  const Eigen::VectorXd d11 = fd * j.values.col(3);
  const Eigen::VectorXd d12 = fd * j.values.col(4);
  const Eigen::VectorXd d22 = fd * j.values.col(5);
  for (int k = 0; k < nt; ++k) {
    const Eigen::Matrix4d m = third_order_matrix(f.normal(k, 0), f.normal(k, 1));
    if (std::abs(m.determinant()) < min_abs_det) throw SolverError("singular third-order jet system");
    const double rhs4 = 4.0 * mj.mu[k] * (datum.m_tt.values()(k, 0) - d_tasn[k] - s_grada_n[k]);
    const Eigen::Vector4d rhs(d11[k], d12[k], d22[k], rhs4);
    j.values.block(k, 6, 1, 4) = m.partialPivLu().solve(rhs).transpose();
  }
  return j;
}

}  // namespace vlab
