#pragma once

// Variable-viscosity Stokes and stationary Navier-Stokes on the disk.
//
// Stokes is solved for the stream function: u = (psi_y, -psi_x) makes the
// velocity divergence free by construction and the curl of the momentum
// equation eliminates the pressure,
//   (dxx - dyy)[mu (psi_yy - psi_xx)] - 4 dxy[mu psi_xy] = curl f,
// with clamped data psi = int g.n ds and psi_n = -g.t on the circle imposed
// exactly and the equation enforced in least squares at every node.
// The pressure is then the least-squares potential of div(2 mu eps) - f.

#include "vlab/domain.hpp"
#include "vlab/errors.hpp"
#include "vlab/lsq.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace vlab {

class ViscosityField {
 public:
  explicit ViscosityField(RealField mu) : mu_(std::move(mu)) {
    for (Index p = 0; p < mu_.values().size(); ++p) {
      const double v = mu_[p];
      if (!std::isfinite(v) || v <= 0.0) {
        throw ConfigError("viscosity must be positive and finite at every node");
      }
    }
  }

  template <class F>
  static ViscosityField sample(const Domain& d, F&& f) {
    return ViscosityField(RealField::sample(d, std::forward<F>(f)));
  }
  static ViscosityField constant(const Domain& d, double value) {
    return sample(d, [value](double, double) { return value; });
  }

  const Domain& domain() const { return mu_.domain(); }
  const RealField& field() const { return mu_; }
  double operator[](Index p) const { return mu_[p]; }

  /// mu on the boundary circle.
  BoundaryTrace boundary_value() const { return trace(mu_); }
  /// grad mu on the boundary circle (two columns).
  BoundaryTrace boundary_gradient() const {
    return trace(VectorField{differentiate(mu_, 1, 0), differentiate(mu_, 0, 1)});
  }

 private:
  RealField mu_;
};

struct FlowState {
  VectorField u;
  RealField p;
  std::string gauge = "zero-mean";
};

struct StokesCauchyDatum {
  BoundaryTrace velocity;
  BoundaryTrace traction;
};

/// Net flux of a boundary velocity trace, int g.n ds.
inline double check_flux(const BoundaryTrace& g) {
  if (g.dim() != 2) throw ConfigError("flux needs a 2-vector trace");
  const FrameTrace f = boundary_frame(static_cast<int>(g.size()));
  return project(g, f.normal).sum() * 2.0 * pi / static_cast<double>(g.size());
}

/// Stress sigma = 2 mu eps(u) - p I.
inline SymTensorField stress(const FlowState& s, const ViscosityField& mu) {
  SymTensorField e = strain(s.u);
  const Eigen::ArrayXd two_mu = 2.0 * mu.field().values().array();
  e.xx.values() = (two_mu * e.xx.values().array() - s.p.values().array()).matrix();
  e.yy.values() = (two_mu * e.yy.values().array() - s.p.values().array()).matrix();
  e.xy.values() = (two_mu * e.xy.values().array()).matrix();
  return e;
}

/// Boundary traction sigma n of a symmetric stress field.
inline BoundaryTrace traction_of(const SymTensorField& sigma) {
  const int nt = sigma.domain().angular_count();
  const FrameTrace f = boundary_frame(nt);
  Eigen::VectorXd tx(nt), ty(nt);
  for (int k = 0; k < nt; ++k) {
    tx[k] = sigma.xx[k] * f.normal(k, 0) + sigma.xy[k] * f.normal(k, 1);
    ty[k] = sigma.xy[k] * f.normal(k, 0) + sigma.yy[k] * f.normal(k, 1);
  }
  return BoundaryTrace::vector(tx, ty);
}

inline BoundaryTrace traction(const FlowState& s, const ViscosityField& mu) {
  return traction_of(stress(s, mu));
}

/// Net force and torque of a traction trace: (F1, F2, x1 T2 - x2 T1).
inline Eigen::Vector3d force_and_torque(const BoundaryTrace& t) {
  const auto n = static_cast<int>(t.size());
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * pi * k / n;
    out[0] += t.values()(k, 0);
    out[1] += t.values()(k, 1);
    out[2] += std::cos(th) * t.values()(k, 1) - std::sin(th) * t.values()(k, 0);
  }
  return out * (2.0 * pi / n);
}

struct StokesOptions {
  double flux_tol = 1e-8;
  double min_rcond = 1e-14;
};

/// Stokes solver bound to one viscosity; the factorization is reused across
/// boundary data and body forces (Picard iterations, input families).
class StokesSolver {
 public:
  explicit StokesSolver(ViscosityField mu, StokesOptions opt = {})
      : mu_(std::move(mu)), opt_(opt) {
    const Domain& d = mu_.domain();
    const Index n = d.size();
    const int nt = d.angular_count();
    const Eigen::MatrixXd& dxx = d.derivative_matrix(2, 0);
    const Eigen::MatrixXd& dyy = d.derivative_matrix(0, 2);
    const Eigen::MatrixXd& dxy = d.derivative_matrix(1, 1);
    const Eigen::VectorXd& m = mu_.field().values();
    const Eigen::MatrixXd h = dxx - dyy;
    Eigen::MatrixXd a = -(h * (m.asDiagonal() * h));
    a.noalias() -= 4.0 * dxy * (m.asDiagonal() * dxy);
    // Near-pole rows carry k^4 / r^4 sized entries; equilibrating them is
    // what keeps the solve near roundoff.
    row_scale_.resize(n);
    for (Index i = 0; i < n; ++i) row_scale_[i] = 1.0 / a.row(i).cwiseAbs().maxCoeff();
    a = row_scale_.asDiagonal() * a;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * nt, n);
    for (int k = 0; k < nt; ++k) {
      c(k, k) = 1.0;
      c.row(nt + k) = d.dr().row(k);
    }
    lsq_ = ConstrainedLeastSquares(a, c, opt_.min_rcond);
  }

  const ViscosityField& viscosity() const { return mu_; }
  const Domain& domain() const { return mu_.domain(); }

  /// Solves div sigma(u, p) = force, div u = 0, u = g on the circle.
  FlowState solve(const BoundaryTrace& g, const VectorField* force = nullptr) const {
    const Domain& d = domain();
    const int nt = d.angular_count();
    if (g.dim() != 2 || g.size() != nt) {
      throw ConfigError("velocity trace must have one 2-vector per boundary node");
    }
    const double flux = check_flux(g);
    const double scale = g.values().cwiseAbs().sum() * 2.0 * pi / nt;
    if (std::abs(flux) > opt_.flux_tol * std::max(1.0, scale)) {
      throw IncompatibleDataError("boundary velocity has net flux " + std::to_string(flux));
    }
    const FrameTrace fr = boundary_frame(nt);
    const Eigen::VectorXd gn = project(g, fr.normal);
    Eigen::VectorXd gn0 = gn.array() - gn.mean();
    const BoundaryTrace psi_b = integrate_trace(BoundaryTrace::scalar(gn0), 0, 0.0, 1.0);

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d.size());
    if (force) rhs = row_scale_.cwiseProduct(curl(force->x, force->y).values());
    Eigen::VectorXd bc(2 * nt);
    bc.head(nt) = psi_b.values().col(0);
    bc.tail(nt) = -project(g, fr.tangent);
    const Eigen::VectorXd psi = lsq_.solve(rhs, bc);

    FlowState s{VectorField{RealField(d, d.dy() * psi), RealField(d, -(d.dx() * psi))},
                RealField(d)};
    s.p = pressure(s.u, force);
    return s;
  }

 private:
  // Least-squares potential of div(2 mu eps) - f, gauged to zero mean.
  RealField pressure(const VectorField& u, const VectorField* force) const {
    const Domain& d = domain();
    const Index n = d.size();
    const auto& cod = d.cached<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>>(
        "pressure-gradient", [&] {
          Eigen::MatrixXd g(2 * n, n);
          g.topRows(n) = d.dx();
          g.bottomRows(n) = d.dy();
          Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> c;
          c.setThreshold(1e-10);
          c.compute(g);
          return c;
        });
    const SymTensorField e = strain(u);
    const Eigen::ArrayXd two_mu = 2.0 * mu_.field().values().array();
    const RealField sxx(d, (two_mu * e.xx.values().array()).matrix());
    const RealField sxy(d, (two_mu * e.xy.values().array()).matrix());
    const RealField syy(d, (two_mu * e.yy.values().array()).matrix());
    Eigen::VectorXd r(2 * n);
    r.head(n) = (differentiate(sxx, 1, 0) + differentiate(sxy, 0, 1)).values();
    r.tail(n) = (differentiate(sxy, 1, 0) + differentiate(syy, 0, 1)).values();
    if (force) {
      r.head(n) -= force->x.values();
      r.tail(n) -= force->y.values();
    }
    Eigen::VectorXd p = cod.solve(r);
    p.array() -= d.weights().dot(p) / pi;
    return RealField(d, std::move(p));
  }

  ViscosityField mu_;
  StokesOptions opt_;
  Eigen::VectorXd row_scale_;
  ConstrainedLeastSquares lsq_;
};

inline FlowState solve_stokes(const Domain& d, const ViscosityField& mu, const BoundaryTrace& g,
                              StokesOptions opt = {}) {
  if (!d.same_grid(mu.domain())) throw ConfigError("viscosity lives on a different grid");
  return StokesSolver(mu, opt).solve(g);
}

/// Convective term (u . grad) u.
inline VectorField convection(const VectorField& u) {
  const Domain& d = u.domain();
  const Eigen::ArrayXd a = u.x.values().array(), b = u.y.values().array();
  const Eigen::ArrayXd ux = d.dx() * u.x.values(), uy = d.dy() * u.x.values();
  const Eigen::ArrayXd vx = d.dx() * u.y.values(), vy = d.dy() * u.y.values();
  return {RealField(d, (a * ux + b * uy).matrix()), RealField(d, (a * vx + b * vy).matrix())};
}

struct NseOptions {
  double rel_tol = 1e-10;
  int max_iter = 50;
  double max_contraction = 0.9;
};

struct NseResult {
  FlowState state;
  std::vector<double> updates;  // relative velocity update per Picard step
  double contraction = 0.0;
  bool converged = false;
};

/// Picard iteration for div sigma(u, p) = (u . grad) u from the Stokes
/// solution. Throws SolverError when the early contraction factor reaches
/// max_contraction or the iteration cap is hit.
inline NseResult solve_nse(const StokesSolver& stokes, const BoundaryTrace& g,
                           NseOptions opt = {}) {
  NseResult res{stokes.solve(g)};
  auto norm = [](const VectorField& v) {
    return std::sqrt(v.x.values().squaredNorm() + v.y.values().squaredNorm());
  };
  for (int it = 0; it < opt.max_iter; ++it) {
    const VectorField f = convection(res.state.u);
    FlowState next = stokes.solve(g, &f);
    const double du = std::sqrt((next.u.x.values() - res.state.u.x.values()).squaredNorm() +
                                (next.u.y.values() - res.state.u.y.values()).squaredNorm());
    const double scale = std::max(norm(next.u), 1e-300);
    res.updates.push_back(du / scale);
    res.state = std::move(next);
    if (res.updates.back() < opt.rel_tol) {
      res.converged = true;
      break;
    }
    // Updates near the Stokes roundoff level stop shrinking; that is convergence, not divergence.
    const std::size_t k = res.updates.size();
    if (res.updates.back() < 100.0 * opt.rel_tol && k >= 2 && res.updates[k - 1] >= res.updates[k - 2]) {
      res.converged = true;
      break;
    }
    if (res.updates.size() == 3 && res.updates[1] >= 100.0 * opt.rel_tol) {
      const double q1 = res.updates[1] / res.updates[0];
      const double q2 = res.updates[2] / res.updates[1];
      res.contraction = std::max(q1, q2);
      if (res.contraction >= opt.max_contraction) {
        throw SolverError("Picard contraction factor " + std::to_string(res.contraction) +
                          " too large; boundary data outside the small-data range");
      }
    }
  }
  if (!res.converged) {
    throw SolverError("Picard iteration did not converge in " + std::to_string(opt.max_iter) +
                      " steps (last update " + std::to_string(res.updates.back()) + ")");
  }
  if (res.updates.size() >= 2 && res.contraction == 0.0) {
    res.contraction = res.updates[1] / std::max(res.updates[0], 1e-300);
  }
  return res;
}

inline FlowState solve_nse(const Domain& d, const ViscosityField& mu, const BoundaryTrace& g,
                           NseOptions opt = {}) {
  if (!d.same_grid(mu.domain())) throw ConfigError("viscosity lives on a different grid");
  return solve_nse(StokesSolver(mu), g, opt).state;
}

// ---------------------------------------------------------------------------
// Small-data linearization

struct LinearizationRow {
  double eps = 0.0;
  double err_velocity = 0.0;  // boundary trace, ||u_eps/eps - v0||
  double err_traction = 0.0;  // ||sigma_eps n / eps - sigma_0 n||
  double err_interior = 0.0;  // area L2 of u_eps/eps - v0
};

struct LinearizationReport {
  std::vector<LinearizationRow> rows;
  std::optional<double> slope_velocity;
  std::optional<double> slope_traction;
  std::optional<double> slope_interior;
  FlowState reference;
};

/// Least-squares slope of log(err) against log(eps); empty when fewer than
/// two usable points.
inline std::optional<double> loglog_slope(const std::vector<double>& x,
                                          const std::vector<double>& y, double floor = 0.0) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > floor) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const auto m = lx.size();
  if (m < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) mx += lx[i], my += ly[i];
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

inline double boundary_l2(const BoundaryTrace& t) {
  return std::sqrt(t.values().squaredNorm() * 2.0 * pi / static_cast<double>(t.size()));
}

/// Solves NSE with data eps * psi for each eps and compares the rescaled
/// Cauchy data with the Stokes datum of psi. Error norms are boundary L2
/// (traces) and area L2 (interior velocity).
inline LinearizationReport linearization_experiment(const ViscosityField& mu,
                                                    const BoundaryTrace& psi,
                                                    const std::vector<double>& eps_list,
                                                    NseOptions opt = {}) {
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps list must be strictly decreasing");
  }
  for (double e : eps_list) {
    if (!(e > 0.0)) throw ConfigError("eps values must be positive");
  }
  const StokesSolver stokes(mu);
  LinearizationReport rep{{}, {}, {}, {}, stokes.solve(psi)};
  const BoundaryTrace t0 = traction(rep.reference, mu);
  const BoundaryTrace v0 = trace(rep.reference.u);
  const Domain& d = mu.domain();
  for (double e : eps_list) {
    BoundaryTrace data = psi;
    data.values() *= e;
    const FlowState s = solve_nse(stokes, data, opt).state;
    LinearizationRow row{e};
    BoundaryTrace dv = trace(s.u);
    dv.values() = dv.values() / e - v0.values();
    row.err_velocity = boundary_l2(dv);
    BoundaryTrace dt = traction(s, mu);
    dt.values() = dt.values() / e - t0.values();
    row.err_traction = boundary_l2(dt);
    const Eigen::ArrayXd ex = s.u.x.values().array() / e - rep.reference.u.x.values().array();
    const Eigen::ArrayXd ey = s.u.y.values().array() / e - rep.reference.u.y.values().array();
    row.err_interior = std::sqrt(d.weights().dot((ex * ex + ey * ey).matrix()));
    rep.rows.push_back(row);
  }
  std::vector<double> e, a, b, c;
  for (const auto& r : rep.rows) {
    e.push_back(r.eps);
    a.push_back(r.err_velocity);
    b.push_back(r.err_traction);
    c.push_back(r.err_interior);
  }
  if (rep.rows.size() >= 2) {
    rep.slope_velocity = loglog_slope(e, a);
    rep.slope_traction = loglog_slope(e, b);
    rep.slope_interior = loglog_slope(e, c);
  }
  return rep;
}

}  // namespace vlab
