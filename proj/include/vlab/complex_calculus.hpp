#pragma once

// Cauchy-Pompeiu operators on the unit disk.
//
// Solid operators are evaluated per angular Fourier mode. Writing
// f = sum_k f_k(s) e^{ik phi}, the solid Cauchy transform
//   T f(z) = -(1/pi) int f(zeta) / (zeta - z) dA
// is sum_k e^{i(k-1) theta} G_k(r) with
//   G_k = 2 int_0^r f_k(s) (s/r)^{1-k} ds      (k <= 0)
//   G_k = -2 int_r^1 f_k(s) (r/s)^{k-1} ds     (k >= 1).
// The radial integrals use Gauss-Legendre rules whose size is the density
// parameter; f_k is interpolated on the full Chebyshev diameter using
// f_k(-s) = (-1)^k f_k(s). The bounded second-order kernel reduces to
//   K2 f = (1/pi) int f (zbar - zetabar)/(z - zeta) dA = zbar T f - T[zbar f].
//
// Boundary integrals are exact per mode: the interior Cauchy integral of a
// trace F is sum_{k>=0} F_k z^k, and with log(z - zeta) = Log(-zeta) +
// Log(1 - z conj(zeta)), Log(-e^{i theta}) = i(theta - pi) on (0, 2 pi),
//   L[c](z) = int c log(z - zeta) dzetabar
//           = -2 pi i sum_{k != 1} c_k/(k-1) + 2 pi i sum_{n>=1} c_{n+1} z^n / n.

#include "vlab/domain.hpp"
#include "vlab/errors.hpp"
#include "vlab/spectral.hpp"
#include "vlab/wirtinger.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace vlab {

inline constexpr int default_dbar_density = 32;

// ---------------------------------------------------------------------------
// Field helpers

inline ComplexField z_field(const Domain& d) {
  return ComplexField::sample(d, [](double x, double y) { return cplx(x, y); });
}
inline ComplexField zbar_field(const Domain& d) {
  return ComplexField::sample(d, [](double x, double y) { return cplx(x, -y); });
}
inline ComplexField operator*(const ComplexField& a, const ComplexField& b) {
  return ComplexField(a.domain(), a.values().cwiseProduct(b.values()));
}

/// Relative L2 norm (area weighted) of a - b against b; nodes on the
/// boundary circle are included.
inline double relative_l2(const ComplexField& a, const ComplexField& b) {
  const Eigen::VectorXd& w = a.domain().weights();
  const double num = w.dot((a.values() - b.values()).cwiseAbs2());
  const double den = w.dot(b.values().cwiseAbs2());
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double l2_norm(const ComplexField& a) {
  return std::sqrt(a.domain().weights().dot(a.values().cwiseAbs2()));
}

// ---------------------------------------------------------------------------
// Solid operators

namespace detail {

struct RadialRule {
  // Per ring: Gauss nodes and weights on [0, r] and [r, 1], and the rows
  // interpolating diameter data at those nodes.
  std::vector<Eigen::VectorXd> s_in, w_in, s_out, w_out;
  std::vector<Eigen::MatrixXd> e_in, e_out;
};

inline const RadialRule& radial_rule(const Domain& d, int density) {
  return d.cached<RadialRule>("dbar-radial-" + std::to_string(density), [&] {
    const int nr = d.radial_count();
    const int n = d.chebyshev_order();
    const Eigen::VectorXd x = spectral::chebyshev_points(n);
    const Eigen::VectorXd bw = spectral::chebyshev_bary_weights(n);
    const auto [gx, gw] = spectral::gauss_legendre(density);
    RadialRule rule;
    auto build = [&](double a, double b, Eigen::VectorXd& s, Eigen::VectorXd& w, Eigen::MatrixXd& e) {
      s.resize(density);
      w.resize(density);
      e.resize(density, n + 1);
      for (int q = 0; q < density; ++q) {
        s[q] = 0.5 * (b - a) * gx[q] + 0.5 * (a + b);
        w[q] = 0.5 * (b - a) * gw[q];
        e.row(q) = spectral::chebyshev_lagrange_row(x, bw, s[q]);
      }
    };
    for (int i = 0; i < nr; ++i) {
      const double r = d.radial_nodes()[i];
      rule.s_in.emplace_back();
      rule.w_in.emplace_back();
      rule.e_in.emplace_back();
      rule.s_out.emplace_back();
      rule.w_out.emplace_back();
      rule.e_out.emplace_back();
      build(0.0, r, rule.s_in.back(), rule.w_in.back(), rule.e_in.back());
      build(r, 1.0, rule.s_out.back(), rule.w_out.back(), rule.e_out.back());
    }
    return rule;
  });
}

/// Angular Fourier coefficients ring by ring: row i, DFT slot k.
inline Eigen::MatrixXcd ring_modes(const ComplexField& f) {
  const Domain& d = f.domain();
  const int nr = d.radial_count(), nt = d.angular_count();
  Eigen::MatrixXcd c(nr, nt);
  for (int i = 0; i < nr; ++i) {
    c.row(i) = spectral::dft(Eigen::VectorXcd(f.values().segment(d.index(i, 0), nt))).transpose();
  }
  return c;
}

inline ComplexField from_ring_modes(const Domain& d, const Eigen::MatrixXcd& c) {
  const int nr = d.radial_count(), nt = d.angular_count();
  Eigen::VectorXcd v(d.size());
  for (int i = 0; i < nr; ++i) {
    v.segment(d.index(i, 0), nt) = spectral::idft(Eigen::VectorXcd(c.row(i).transpose()));
  }
  return ComplexField(d, std::move(v));
}

}  // namespace detail

/// Solid Cauchy transform T f = -(1/pi) int f / (zeta - z) dA, so that
/// d_zbar T f = f. `density` is the Gauss-Legendre count per radial interval.
inline ComplexField solid_cauchy(const ComplexField& f, int density = default_dbar_density) {
  if (density < 1) throw ConfigError("quadrature density must be positive");
  const Domain& d = f.domain();
  const int nr = d.radial_count(), nt = d.angular_count(), n = d.chebyshev_order();
  const detail::RadialRule& rule = detail::radial_rule(d, density);
  const Eigen::MatrixXcd c = detail::ring_modes(f);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nr, nt);
  Eigen::VectorXcd diam(n + 1);
  for (int slot = 0; slot < nt; ++slot) {
    const int k = spectral::wavenumber(slot, nt);
    if (k == nt / 2) continue;  // Nyquist mode carries no sign information
    const double parity = (k % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j <= n; ++j) diam[j] = j < nr ? c(j, slot) : parity * c(n - j, slot);
    const int dst = ((k - 1) % nt + nt) % nt;
    for (int i = 0; i < nr; ++i) {
      const double r = d.radial_nodes()[i];
      cplx g = 0.0;
      if (k <= 0) {
        const Eigen::VectorXcd fv = rule.e_in[i].cast<cplx>() * diam;
        for (int q = 0; q < density; ++q) {
          g += rule.w_in[i][q] * std::pow(rule.s_in[i][q] / r, 1 - k) * fv[q];
        }
        g *= 2.0;
      } else {
        const Eigen::VectorXcd fv = rule.e_out[i].cast<cplx>() * diam;
        for (int q = 0; q < density; ++q) {
          g += rule.w_out[i][q] * std::pow(r / rule.s_out[i][q], k - 1) * fv[q];
        }
        g *= -2.0;
      }
      out(i, dst) += g;
    }
  }
  return detail::from_ring_modes(d, out);
}

/// K2 f = (1/pi) int f (zbar - zetabar)/(z - zeta) dA, so d^2_zbar K2 f = f.
inline ComplexField solid_k2(const ComplexField& f, int density = default_dbar_density) {
  const ComplexField zb = zbar_field(f.domain());
  return zb * solid_cauchy(f, density) - solid_cauchy(zb * f, density);
}

/// Solution operators of d^order u = f in the variable `kind`: order 1 is
/// the solid Cauchy transform, order 2 the bounded kernel (zbar-zetabar)/(z-zeta)
/// (or its conjugate for kind z).
inline ComplexField solve_dbar(const ComplexField& f, Kind kind, int order,
                               int density = default_dbar_density) {
  if (order != 1 && order != 2) throw UnsupportedError("solve_dbar order must be 1 or 2");
  if (kind == Kind::z) return conj(solve_dbar(conj(f), Kind::zbar, order, density));
  return order == 1 ? solid_cauchy(f, density) : solid_k2(f, density);
}

// ---------------------------------------------------------------------------
// Boundary integrals

/// Fourier coefficients of a complex boundary trace with the Nyquist mode
/// removed (DFT slot order).
inline Eigen::VectorXcd trace_modes(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd c = spectral::dft(v);
  const auto n = static_cast<int>(v.size());
  if (n % 2 == 0) c[n / 2] = 0.0;
  return c;
}

/// Evaluates sum_{n>=0} a_n z^n at every node.
inline ComplexField power_series(const Domain& d, const Eigen::VectorXcd& a) {
  Eigen::VectorXcd v(d.size());
  for (Index p = 0; p < d.size(); ++p) {
    const cplx z = d.z(p);
    cplx acc = 0.0;
    for (Index m = a.size() - 1; m >= 0; --m) acc = acc * z + a[m];
    v[p] = acc;
  }
  return ComplexField(d, std::move(v));
}

/// Interior Cauchy integral (1/2 pi i) oint F/(zeta - z) dzeta of a boundary
/// trace, evaluated on the grid (boundary nodes get the interior limit).
inline ComplexField cauchy_integral(const Domain& d, const Eigen::VectorXcd& trace) {
  const auto n = static_cast<int>(trace.size());
  const Eigen::VectorXcd c = trace_modes(trace);
  Eigen::VectorXcd a(n / 2);
  for (int k = 0; k < n / 2; ++k) a[k] = c[k];
  return power_series(d, a);
}

/// Interior limit of the Cauchy integral on the boundary nodes themselves.
inline Eigen::VectorXcd cauchy_boundary_limit(const Eigen::VectorXcd& trace) {
  const auto n = static_cast<int>(trace.size());
  Eigen::VectorXcd c = trace_modes(trace);
  for (int k = n / 2; k < n; ++k) c[k] = 0.0;
  return spectral::idft(c);
}

/// L[c](z) = oint c(zeta) log(z - zeta) dzetabar on the grid.
inline ComplexField log_integral(const Domain& d, const Eigen::VectorXcd& trace) {
  const auto n = static_cast<int>(trace.size());
  const Eigen::VectorXcd c = trace_modes(trace);
  const cplx two_pi_i(0.0, 2.0 * pi);
  cplx constant = 0.0;
  for (int slot = 0; slot < n; ++slot) {
    const int k = spectral::wavenumber(slot, n);
    if (k != 1) constant += c[slot] / static_cast<double>(k - 1);
  }
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(n / 2);
  a[0] = -two_pi_i * constant;
  for (int m = 1; m + 1 < n / 2; ++m) a[m] = two_pi_i * c[m + 1] / static_cast<double>(m);
  return power_series(d, a);
}

/// M[c](z) = oint c(zeta) log(zbar - zetabar) dzeta = conj(L[conj c](z)).
inline ComplexField conj_log_integral(const Domain& d, const Eigen::VectorXcd& trace) {
  return conj(log_integral(d, trace.conjugate()));
}

// ---------------------------------------------------------------------------
// Gauss and Cauchy-Pompeiu formulas

struct GaussReport {
  cplx area;
  cplx boundary;
  double residual = 0.0;
};

/// Area integral of d_zbar w (kind zbar) against (1/2i) oint w dz, or of
/// d_z w against -(1/2i) oint w dzbar (kind z).
inline GaussReport gauss_residual(const ComplexField& w, Kind kind) {
  const Domain& d = w.domain();
  const int nt = d.angular_count();
  const cplx area = integrate_area(wirtinger(w, kind, 1));
  cplx edge = 0.0;
  for (int k = 0; k < nt; ++k) {
    const double th = d.boundary_theta(k);
    const cplx dz = cplx(0.0, 1.0) * std::polar(1.0, th);  // dz/dtheta
    edge += kind == Kind::zbar ? w[k] * dz : w[k] * std::conj(dz);
  }
  edge *= 2.0 * pi / nt;
  const cplx boundary = kind == Kind::zbar ? edge / cplx(0.0, 2.0) : -edge / cplx(0.0, 2.0);
  return {area, boundary, std::abs(area - boundary)};
}

struct PompeiuReport {
  ComplexField area_term;
  ComplexField boundary_term;
  double residual = 0.0;  // max |area + boundary - w| over nodes off the circle
};

/// Right-hand side of the order-1 or order-2 Cauchy-Pompeiu representation
/// of w, compared with w.
inline PompeiuReport pompeiu_reconstruct(const ComplexField& w, int order, Kind kind,
                                         int density = default_dbar_density) {
  if (order != 1 && order != 2) throw UnsupportedError("Pompeiu order must be 1 or 2");
  const Domain& d = w.domain();
  if (kind == Kind::z) {
    PompeiuReport r = pompeiu_reconstruct(conj(w), order, Kind::zbar, density);
    r.area_term = conj(r.area_term);
    r.boundary_term = conj(r.boundary_term);
    return r;
  }
  const Eigen::VectorXcd wb = boundary_values(w);
  ComplexField boundary = cauchy_integral(d, wb);
  ComplexField area(d);
  if (order == 1) {
    area = solid_cauchy(wirtinger(w, Kind::zbar, 1), density);
  } else {
    const ComplexField dw = wirtinger(w, Kind::zbar, 1);
    const Eigen::VectorXcd dwb = boundary_values(dw);
    Eigen::VectorXcd zb_dwb(dwb.size());
    for (Index k = 0; k < dwb.size(); ++k) zb_dwb[k] = std::conj(d.z(k)) * dwb[k];
    boundary = boundary - cauchy_integral(d, zb_dwb) + zbar_field(d) * cauchy_integral(d, dwb);
    area = solid_k2(wirtinger(w, Kind::zbar, 2), density);
  }
  const ComplexField rebuilt = area + boundary;
  return {area, boundary, interior_max(rebuilt - w)};
}

// ---------------------------------------------------------------------------
// The pair d^2_z w = f, d^2_zbar w = g

struct BiDbarResult {
  ComplexField w;
  double compatibility = 0.0;  // relative L2 of d^2_zbar f - d^2_z g
};

/// Particular solution of d^2_z w = f, d^2_zbar w = g from
///   w = K2[g] + conj-K2[f] - conj-K2[K2[d^2_zbar f]] + phi1 + phi2,
/// with the log-kernel boundary corrections phi1, phi2 evaluated per mode.
/// Throws IncompatibleDataError when d^2_zbar f != d^2_z g beyond
/// `compat_tol` (relative L2, relative to the larger of the two norms).
inline BiDbarResult solve_bi_dbar2(const ComplexField& f, const ComplexField& g,
                                   int density = default_dbar_density, double compat_tol = 1e-6) {
  const Domain& d = f.domain();
  const int nt = d.angular_count();
  const ComplexField fzz = wirtinger(f, Kind::zbar, 2);
  const ComplexField gzz = wirtinger(g, Kind::z, 2);
  const double scale = std::max({l2_norm(fzz), l2_norm(gzz), l2_norm(f), l2_norm(g)});
  const double compat = scale > 0.0 ? l2_norm(fzz - gzz) / scale : 0.0;
  if (compat > compat_tol) {
    throw IncompatibleDataError("d^2_zbar f and d^2_z g differ (relative L2 " +
                                std::to_string(compat) + ")");
  }

  ComplexField w = solve_dbar(g, Kind::zbar, 2, density) + solve_dbar(f, Kind::z, 2, density) -
                   solve_dbar(solve_dbar(fzz, Kind::zbar, 2, density), Kind::z, 2, density);

  const ComplexField z = z_field(d), zb = zbar_field(d), zzb = z * zb;
  Eigen::VectorXcd zeta(nt), zetab(nt);
  for (int k = 0; k < nt; ++k) {
    zeta[k] = d.z(k);
    zetab[k] = std::conj(zeta[k]);
  }
  const cplx two_pi_i(0.0, 2.0 * pi);

  // phi2 = -(1/2 pi i) [ oint dg |z-zeta|^2 log(z-zeta) dzetabar
  //                     + oint g (zbar - zetabar) log(z-zeta) dzetabar ]
  const Eigen::VectorXcd gb = boundary_values(g);
  const Eigen::VectorXcd dgb = boundary_values(wirtinger(g, Kind::z, 1));
  ComplexField phi2 = zzb * log_integral(d, dgb) - z * log_integral(d, dgb.cwiseProduct(zetab)) -
                      zb * log_integral(d, dgb.cwiseProduct(zeta)) + log_integral(d, dgb) +
                      zb * log_integral(d, gb) - log_integral(d, gb.cwiseProduct(zetab));
  phi2 *= -1.0 / two_pi_i;

  // phi1 with the inner boundary integrals in closed form on the circle:
  //   A = oint dbar f (zetabar - lambdabar)/(zeta - lambda) dlambda = -2 pi i zetabar mean(dbar f)
  //   B = oint f / (zeta - lambda) dlambda = -2 pi i C+[f]
  //   C = oint dbar f / (zeta - lambda) dlambda = -2 pi i C+[dbar f]
  const Eigen::VectorXcd fb = boundary_values(f);
  const Eigen::VectorXcd hb = boundary_values(wirtinger(f, Kind::zbar, 1));
  const Eigen::VectorXcd a = -two_pi_i * hb.mean() * zetab;
  const Eigen::VectorXcd b = -two_pi_i * cauchy_boundary_limit(fb);
  const Eigen::VectorXcd c = -two_pi_i * cauchy_boundary_limit(hb);
  ComplexField phi1 = z * conj_log_integral(d, a) - conj_log_integral(d, a.cwiseProduct(zeta)) +
                      z * conj_log_integral(d, b) - conj_log_integral(d, b.cwiseProduct(zeta)) +
                      zzb * conj_log_integral(d, c) - z * conj_log_integral(d, c.cwiseProduct(zetab)) -
                      zb * conj_log_integral(d, c.cwiseProduct(zeta)) + conj_log_integral(d, c);
  phi1 *= -1.0 / (two_pi_i * two_pi_i);

  w += phi1;
  w += phi2;
  return {w, compat};
}

}  // namespace vlab
