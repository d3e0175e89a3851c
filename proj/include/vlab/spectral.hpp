#pragma once

// One-dimensional spectral building blocks: Chebyshev collocation,
// periodic Fourier collocation and Gauss-Legendre rules.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

namespace vlab::spectral {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Chebyshev extreme points cos(j*pi/n), j = 0..n (descending from 1 to -1).
inline Eigen::VectorXd chebyshev_points(int n) {
  Eigen::VectorXd x(n + 1);
  for (int j = 0; j <= n; ++j) x[j] = std::cos(pi * j / n);
  return x;
}

/// Chebyshev differentiation matrix on chebyshev_points(n).
/// Diagonal from the negative-sum trick, which keeps D*1 = 0 to roundoff.
inline Eigen::MatrixXd chebyshev_diff_matrix(int n) {
  const Eigen::VectorXd x = chebyshev_points(n);
  Eigen::VectorXd c = Eigen::VectorXd::Ones(n + 1);
  c[0] = c[n] = 2.0;
  for (int j = 1; j <= n; j += 2) c[j] = -c[j];
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i != j) d(i, j) = (c[i] / c[j]) / (x[i] - x[j]);
    }
  }
  for (int i = 0; i <= n; ++i) d(i, i) = -d.row(i).sum();
  return d;
}

/// Barycentric weights for chebyshev_points(n).
inline Eigen::VectorXd chebyshev_bary_weights(int n) {
  Eigen::VectorXd w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = (j % 2 == 0) ? 1.0 : -1.0;
  w[0] *= 0.5;
  w[n] *= 0.5;
  return w;
}

/// Row of Lagrange basis values l_j(t) for the Chebyshev interpolant.
inline Eigen::RowVectorXd chebyshev_lagrange_row(const Eigen::VectorXd& nodes,
                                                 const Eigen::VectorXd& bary, double t) {
  const auto m = nodes.size();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (t == nodes[j]) {
      row[j] = 1.0;
      return row;
    }
  }
  double denom = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    row[j] = bary[j] / (t - nodes[j]);
    denom += row[j];
  }
  return row / denom;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  Eigen::VectorXd x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return {x, w};
}

/// Cumulative integration matrix on chebyshev_points(n):
/// (Q f)_i = integral from 1 to x_i of the interpolant of f.
inline Eigen::MatrixXd chebyshev_cumulative_matrix(int n) {
  const Eigen::VectorXd x = chebyshev_points(n);
  const Eigen::VectorXd bw = chebyshev_bary_weights(n);
  const auto [gx, gw] = gauss_legendre(n / 2 + 2);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 1; i <= n; ++i) {
    const double a = x[i], b = 1.0;
    for (Eigen::Index g = 0; g < gx.size(); ++g) {
      const double t = 0.5 * (b - a) * gx[g] + 0.5 * (a + b);
      q.row(i) -= 0.5 * (b - a) * gw[g] * chebyshev_lagrange_row(x, bw, t);
    }
  }
  return q;
}

/// Fourier differentiation matrix on n equispaced periodic nodes (n even).
inline Eigen::MatrixXd fourier_diff_matrix(int n) {
  const double h = 2.0 * pi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int k = i - j;
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = 0.5 * sign / std::tan(0.5 * k * h);
    }
  }
  return d;
}

/// Signed wavenumber of DFT slot k for length n.
inline int wavenumber(int k, int n) { return k <= n / 2 ? k : k - n; }

/// Discrete Fourier coefficients c_k = (1/n) sum_j f_j exp(-i k theta_j),
/// stored in DFT order (slot k holds wavenumber wavenumber(k, n)).
template <class Derived>
Eigen::VectorXcd dft(const Eigen::MatrixBase<Derived>& f) {
  const auto n = static_cast<int>(f.size());
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += cplx(f[j]) * std::polar(1.0, -2.0 * pi * k * j / n);
    }
    c[k] = acc / static_cast<double>(n);
  }
  return c;
}

/// Inverse of dft(): samples on n equispaced nodes.
inline Eigen::VectorXcd idft(const Eigen::VectorXcd& c) {
  const auto n = static_cast<int>(c.size());
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j) {
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k) acc += c[k] * std::polar(1.0, 2.0 * pi * k * j / n);
    f[j] = acc;
  }
  return f;
}

/// Trigonometric interpolation of periodic samples onto m equispaced nodes.
/// The Nyquist mode of an even-length input is split symmetrically.
inline Eigen::VectorXcd resample_periodic(const Eigen::VectorXcd& f, int m) {
  const auto n = static_cast<int>(f.size());
  if (n == m) return f;
  const Eigen::VectorXcd c = dft(f);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(m);
  for (int j = 0; j < m; ++j) {
    const double th = 2.0 * pi * j / m;
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const int w = wavenumber(k, n);
      if (n % 2 == 0 && w == n / 2) {
        acc += c[k] * std::cos(w * th);
      } else {
        acc += c[k] * std::polar(1.0, w * th);
      }
    }
    out[j] = acc;
  }
  return out;
}

}  // namespace vlab::spectral
