#pragma once

// Discretized unit disk, grid fields, collocation derivatives and
// boundary-trace calculus.
//
// Grid: n_theta equispaced angles times n_r positive Chebyshev radii taken
// from the odd-length grid cos(j*pi/(2 n_r - 1)), so r = 0 is never a node.
// Node (ring i, angle k) has flat index i * n_theta + k; ring 0 is the
// boundary |z| = 1, so boundary node k has flat index k.

#include "vlab/errors.hpp"
#include "vlab/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace vlab {

using cplx = std::complex<double>;
using Eigen::Index;
inline constexpr double pi = spectral::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Real matrix times complex vector without promoting the matrix.
inline Eigen::VectorXcd apply_real(const Eigen::MatrixXd& m, const Eigen::VectorXcd& v) {
  const Eigen::VectorXd re = m * v.real();
  const Eigen::VectorXd im = m * v.imag();
  Eigen::VectorXcd out(re.size());
  for (Index i = 0; i < re.size(); ++i) out[i] = cplx(re[i], im[i]);
  return out;
}

class Domain {
 public:
  /// Tensor polar grid on the unit disk. Throws ConfigError when
  /// n_r < 4 or n_theta is odd or below 8.
  static Domain disk(int n_r, int n_theta) {
    if (n_r < 4) throw ConfigError("radial node count must be >= 4, got " + std::to_string(n_r));
    if (n_theta < 8 || n_theta % 2 != 0) {
      throw ConfigError("angular node count must be even and >= 8, got " +
                        std::to_string(n_theta));
    }
    return Domain(std::make_shared<Impl>(n_r, n_theta));
  }

  int radial_count() const { return impl_->nr; }
  int angular_count() const { return impl_->nt; }
  Index size() const { return static_cast<Index>(impl_->nr) * impl_->nt; }
  Index index(int ring, int k) const { return static_cast<Index>(ring) * impl_->nt + k; }
  int ring_of(Index node) const { return static_cast<int>(node / impl_->nt); }
  int angle_of(Index node) const { return static_cast<int>(node % impl_->nt); }
  bool is_boundary(Index node) const { return node < impl_->nt; }

  const Eigen::VectorXd& x() const { return impl_->x; }
  const Eigen::VectorXd& y() const { return impl_->y; }
  const Eigen::VectorXd& r() const { return impl_->r; }
  const Eigen::VectorXd& theta() const { return impl_->th; }
  /// Positive radii, descending, radial_nodes()[0] == 1.
  const Eigen::VectorXd& radial_nodes() const { return impl_->radii; }
  double boundary_theta(int k) const { return 2.0 * pi * k / impl_->nt; }
  cplx z(Index node) const { return {impl_->x[node], impl_->y[node]}; }

  /// Area quadrature weights; exact for polynomials resolved by the grid.
  const Eigen::VectorXd& weights() const { return impl_->w; }

  const Eigen::MatrixXd& dx() const { return impl_->dx; }
  const Eigen::MatrixXd& dy() const { return impl_->dy; }
  /// Radial derivative; at boundary rows this is the outward normal derivative.
  const Eigen::MatrixXd& dr() const { return impl_->dr; }
  /// Derivative with respect to arclength along the boundary circle.
  const Eigen::MatrixXd& dtheta_boundary() const { return impl_->fd; }

  /// Full-diameter Chebyshev data used by the radial quadratures.
  int chebyshev_order() const { return 2 * impl_->nr - 1; }
  const Eigen::MatrixXd& chebyshev_cumulative() const { return impl_->cheb_q; }

  /// Dense matrix of d^ax/dx^ax d^ay/dy^ay (ax + ay <= 4), built once.
  const Eigen::MatrixXd& derivative_matrix(int ax, int ay) const {
    if (ax < 0 || ay < 0 || ax + ay > 4) {
      throw UnsupportedError("derivative order above 4 is not supported");
    }
    if (ax + ay == 0) {
      std::lock_guard lock(impl_->cache_mutex);
      auto it = impl_->cache.find({0, 0});
      if (it == impl_->cache.end()) {
        it = impl_->cache.emplace(std::pair{0, 0}, Eigen::MatrixXd::Identity(size(), size())).first;
      }
      return it->second;
    }
    if (ax + ay == 1) return ax == 1 ? impl_->dx : impl_->dy;
    {
      std::lock_guard lock(impl_->cache_mutex);
      auto it = impl_->cache.find({ax, ay});
      if (it != impl_->cache.end()) return it->second;
    }
    Eigen::MatrixXd m = ax > 0 ? Eigen::MatrixXd(impl_->dx * derivative_matrix(ax - 1, ay))
                               : Eigen::MatrixXd(impl_->dy * derivative_matrix(0, ay - 1));
    std::lock_guard lock(impl_->cache_mutex);
    return impl_->cache.emplace(std::pair{ax, ay}, std::move(m)).first->second;
  }

  /// Laplacian matrix (cached).
  const Eigen::MatrixXd& laplacian() const {
    {
      std::lock_guard lock(impl_->cache_mutex);
      auto it = impl_->cache.find({-1, 2});
      if (it != impl_->cache.end()) return it->second;
    }
    Eigen::MatrixXd lap = derivative_matrix(2, 0) + derivative_matrix(0, 2);
    std::lock_guard lock(impl_->cache_mutex);
    return impl_->cache.emplace(std::pair{-1, 2}, std::move(lap)).first->second;
  }

  /// Per-domain memo for derived objects (factorizations and the like).
  /// `build` runs outside the lock, so racing callers may both build once.
  template <class T, class Build>
  const T& cached(const std::string& key, Build&& build) const {
    {
      std::lock_guard lock(impl_->cache_mutex);
      auto it = impl_->objects.find(key);
      if (it != impl_->objects.end()) return *static_cast<const T*>(it->second.get());
    }
    auto made = std::make_shared<const T>(build());
    std::lock_guard lock(impl_->cache_mutex);
    auto [it, inserted] = impl_->objects.emplace(key, std::move(made));
    return *static_cast<const T*>(it->second.get());
  }

  bool operator==(const Domain& o) const { return impl_ == o.impl_; }
  bool same_grid(const Domain& o) const {
    return radial_count() == o.radial_count() && angular_count() == o.angular_count();
  }

 private:
  struct Impl {
    Impl(int n_r, int n_t) : nr(n_r), nt(n_t) {
      const int n = 2 * nr - 1;
      const Eigen::VectorXd cheb = spectral::chebyshev_points(n);
      const Eigen::MatrixXd dcheb = spectral::chebyshev_diff_matrix(n);
      cheb_q = spectral::chebyshev_cumulative_matrix(n);
      fd = spectral::fourier_diff_matrix(nt);
      radii = cheb.head(nr);

      const Index total = static_cast<Index>(nr) * nt;
      x.resize(total);
      y.resize(total);
      r.resize(total);
      th.resize(total);
      for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nt; ++k) {
          const Index p = static_cast<Index>(i) * nt + k;
          th[p] = 2.0 * pi * k / nt;
          r[p] = radii[i];
          x[p] = (i == 0) ? std::cos(th[p]) : radii[i] * std::cos(th[p]);
          y[p] = (i == 0) ? std::sin(th[p]) : radii[i] * std::sin(th[p]);
        }
      }

      // Radial derivative: fold the full diameter onto r > 0 using
      // u(-r, theta) = u(r, theta + pi).
      dr = Eigen::MatrixXd::Zero(total, total);
      Eigen::MatrixXd dth = Eigen::MatrixXd::Zero(total, total);
      for (int i = 0; i < nr; ++i) {
        for (int k = 0; k < nt; ++k) {
          const Index row = static_cast<Index>(i) * nt + k;
          for (int j = 0; j <= n; ++j) {
            const int ring = j < nr ? j : n - j;
            const int kk = j < nr ? k : (k + nt / 2) % nt;
            dr(row, static_cast<Index>(ring) * nt + kk) += dcheb(i, j);
          }
          for (int kk = 0; kk < nt; ++kk) {
            dth(row, static_cast<Index>(i) * nt + kk) = fd(k, kk);
          }
        }
      }
      dx.resize(total, total);
      dy.resize(total, total);
      for (Index p = 0; p < total; ++p) {
        const double c = std::cos(th[p]), s = std::sin(th[p]);
        dx.row(p) = c * dr.row(p) - (s / r[p]) * dth.row(p);
        dy.row(p) = s * dr.row(p) + (c / r[p]) * dth.row(p);
      }
      // Zero row sums, so constants are annihilated exactly.
      for (Index p = 0; p < total; ++p) {
        dx(p, p) -= dx.row(p).sum();
        dy(p, p) -= dy.row(p).sum();
      }

      // Radial weights: integral_0^1 F(r) r dr exact for even polynomials
      // of degree < 2 n_r (interpolatory in s = r^2, Legendre moments).
      Eigen::MatrixXd legendre(nr, nr);
      for (int i = 0; i < nr; ++i) {
        const double t = 2.0 * radii[i] * radii[i] - 1.0;
        double p0 = 1.0, p1 = t;
        legendre(0, i) = 1.0;
        if (nr > 1) legendre(1, i) = t;
        for (int m = 2; m < nr; ++m) {
          const double p2 = ((2.0 * m - 1.0) * t * p1 - (m - 1.0) * p0) / m;
          legendre(m, i) = p2;
          p0 = p1;
          p1 = p2;
        }
      }
      Eigen::VectorXd moments = Eigen::VectorXd::Zero(nr);
      moments[0] = 0.5;
      const Eigen::VectorXd wr = legendre.fullPivLu().solve(moments);
      w.resize(total);
      for (Index p = 0; p < total; ++p) w[p] = wr[p / nt] * 2.0 * pi / nt;
    }

    int nr;
    int nt;
    Eigen::VectorXd radii, x, y, r, th, w;
    Eigen::MatrixXd dr, dx, dy, fd, cheb_q;
    mutable std::mutex cache_mutex;
    mutable std::map<std::pair<int, int>, Eigen::MatrixXd> cache;
    mutable std::map<std::string, std::shared_ptr<const void>> objects;
  };

  explicit Domain(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;
};

/// Convenience spelling of Domain::disk.
inline Domain build_disk_domain(int n_r, int n_theta) { return Domain::disk(n_r, n_theta); }

// ---------------------------------------------------------------------------
// Fields

template <class T>
class GridField {
 public:
  using Values = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  GridField(Domain d, Values v) : domain_(std::move(d)), values_(std::move(v)) {
    if (values_.size() != domain_.size()) {
      throw ConfigError("field length does not match the domain node count");
    }
  }
  explicit GridField(Domain d) : GridField(d, Values::Zero(d.size())) {}

  /// Samples f(x, y) at every node.
  template <class F>
  static GridField sample(const Domain& d, F&& f) {
    Values v(d.size());
    for (Index p = 0; p < d.size(); ++p) v[p] = static_cast<T>(f(d.x()[p], d.y()[p]));
    return GridField(d, std::move(v));
  }

  const Domain& domain() const { return domain_; }
  const Values& values() const { return values_; }
  Values& values() { return values_; }
  T operator[](Index p) const { return values_[p]; }
  T& operator[](Index p) { return values_[p]; }

  GridField& operator+=(const GridField& o) { values_ += o.values_; return *this; }
  GridField& operator-=(const GridField& o) { values_ -= o.values_; return *this; }
  GridField& operator*=(T s) { values_ *= s; return *this; }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(T s, GridField a) { return a *= s; }

  double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  Domain domain_;
  Values values_;
};

using RealField = GridField<double>;
using ComplexField = GridField<cplx>;

struct VectorField {
  RealField x;
  RealField y;

  const Domain& domain() const { return x.domain(); }

  template <class F>
  static VectorField sample(const Domain& d, F&& f) {
    Eigen::VectorXd vx(d.size()), vy(d.size());
    for (Index p = 0; p < d.size(); ++p) {
      const Vec2 v = f(d.x()[p], d.y()[p]);
      vx[p] = v.x;
      vy[p] = v.y;
    }
    return {RealField(d, vx), RealField(d, vy)};
  }
};

/// Symmetric 2x2 tensor field; the off-diagonal entry is stored once, so
/// component(0, 1) == component(1, 0) holds exactly.
struct SymTensorField {
  RealField xx;
  RealField xy;
  RealField yy;

  const Domain& domain() const { return xx.domain(); }
  const RealField& component(int i, int j) const {
    if (i == 0 && j == 0) return xx;
    if (i == 1 && j == 1) return yy;
    return xy;
  }
};

inline ComplexField to_complex(const RealField& f) {
  return ComplexField(f.domain(), f.values().cast<cplx>());
}

inline ComplexField conj(const ComplexField& f) {
  return ComplexField(f.domain(), f.values().conjugate());
}

/// Collocation derivative d^ax/dx^ax d^ay/dy^ay of a grid field (order <= 4).
/// Exact up to roundoff for polynomials the grid resolves.
template <class T>
GridField<T> differentiate(const GridField<T>& f, int ax, int ay) {
  if (ax < 0 || ay < 0 || ax + ay > 4) {
    throw UnsupportedError("derivative order above 4 is not supported");
  }
  const Domain& d = f.domain();
  typename GridField<T>::Values v = f.values();
  for (int i = 0; i < ax; ++i) {
    if constexpr (std::is_same_v<T, double>) v = d.dx() * v;
    else v = apply_real(d.dx(), v);
  }
  for (int i = 0; i < ay; ++i) {
    if constexpr (std::is_same_v<T, double>) v = d.dy() * v;
    else v = apply_real(d.dy(), v);
  }
  return GridField<T>(d, std::move(v));
}

template <class T>
GridField<T> laplacian(const GridField<T>& f) {
  return differentiate(f, 2, 0) + differentiate(f, 0, 2);
}

inline RealField divergence(const VectorField& u) {
  return differentiate(u.x, 1, 0) + differentiate(u.y, 0, 1);
}

/// Symmetrized gradient (strain) of a velocity field.
inline SymTensorField strain(const VectorField& u) {
  RealField xy = differentiate(u.x, 0, 1) + differentiate(u.y, 1, 0);
  xy *= 0.5;
  return {differentiate(u.x, 1, 0), std::move(xy), differentiate(u.y, 0, 1)};
}

/// Area integral over the disk with the domain quadrature weights.
template <class T>
T integrate_area(const GridField<T>& f) {
  return f.domain().weights().template cast<T>().dot(f.values());
}

// ---------------------------------------------------------------------------
// Boundary traces

/// Values at the boundary nodes (one row per node, one column per
/// component), with arclength coordinates and an anchor node.
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  explicit BoundaryTrace(Eigen::MatrixXd values, int anchor = 0)
      : values_(std::move(values)), anchor_(anchor) {
    const auto n = values_.rows();
    if (n < 2) throw ConfigError("boundary trace needs at least two nodes");
    if (anchor_ < 0 || anchor_ >= n) throw ConfigError("anchor index out of range");
    arclength_.resize(n);
    for (Index k = 0; k < n; ++k) arclength_[k] = 2.0 * pi * static_cast<double>(k) / n;
  }

  static BoundaryTrace scalar(const Eigen::VectorXd& v, int anchor = 0) {
    return BoundaryTrace(Eigen::MatrixXd(v), anchor);
  }
  static BoundaryTrace vector(const Eigen::VectorXd& vx, const Eigen::VectorXd& vy,
                              int anchor = 0) {
    Eigen::MatrixXd m(vx.size(), 2);
    m.col(0) = vx;
    m.col(1) = vy;
    return BoundaryTrace(std::move(m), anchor);
  }

  /// Samples a scalar function of the boundary angle.
  template <class F>
  static BoundaryTrace sample_scalar(int n, F&& f) {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = f(2.0 * pi * k / n);
    return scalar(v);
  }
  /// Samples a vector function of (x, y) on the unit circle.
  template <class F>
  static BoundaryTrace sample_vector(int n, F&& f) {
    Eigen::VectorXd vx(n), vy(n);
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * pi * k / n;
      const Vec2 v = f(std::cos(th), std::sin(th));
      vx[k] = v.x;
      vy[k] = v.y;
    }
    return vector(vx, vy);
  }

  Index size() const { return values_.rows(); }
  Index dim() const { return values_.cols(); }
  int anchor() const { return anchor_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }
  Eigen::VectorXd component(Index c) const { return values_.col(c); }
  const Eigen::VectorXd& arclength() const { return arclength_; }

 private:
  Eigen::MatrixXd values_;
  Eigen::VectorXd arclength_;
  int anchor_ = 0;
};

struct FrameTrace {
  Eigen::MatrixXd normal;   // n x 2
  Eigen::MatrixXd tangent;  // n x 2, t = R_perp^T n = (-n2, n1)
};

inline FrameTrace boundary_frame(int n) {
  FrameTrace f{Eigen::MatrixXd(n, 2), Eigen::MatrixXd(n, 2)};
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * pi * k / n;
    f.normal(k, 0) = std::cos(th);
    f.normal(k, 1) = std::sin(th);
    f.tangent(k, 0) = -f.normal(k, 1);
    f.tangent(k, 1) = f.normal(k, 0);
  }
  return f;
}

inline FrameTrace boundary_frame(const Domain& d) { return boundary_frame(d.angular_count()); }

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> boundary_values(const GridField<T>& f) {
  return f.values().head(f.domain().angular_count());
}

inline BoundaryTrace trace(const RealField& f) { return BoundaryTrace::scalar(boundary_values(f)); }
inline BoundaryTrace trace(const VectorField& u) {
  return BoundaryTrace::vector(boundary_values(u.x), boundary_values(u.y));
}

/// Derivative with respect to arclength, componentwise.
inline BoundaryTrace tangential_derivative(const BoundaryTrace& t) {
  const Eigen::MatrixXd fd = spectral::fourier_diff_matrix(static_cast<int>(t.size()));
  return BoundaryTrace(fd * t.values(), t.anchor());
}

/// Trapezoid integral over the boundary circle, componentwise.
inline Eigen::VectorXd boundary_integral(const BoundaryTrace& t) {
  return t.values().colwise().sum().transpose() * (2.0 * pi / static_cast<double>(t.size()));
}

/// Antiderivative along arclength of a single-valued function's tangential
/// derivative, pinned to anchor_value at node `anchor`. Throws
/// MultivaluedError when the total circulation exceeds tol times the L1 norm.
inline BoundaryTrace integrate_trace(const BoundaryTrace& t, int anchor,
                                     const Eigen::VectorXd& anchor_value, double tol = 1e-8) {
  const auto n = static_cast<int>(t.size());
  if (anchor < 0 || anchor >= n) throw ConfigError("anchor index out of range");
  if (anchor_value.size() != t.dim()) throw ConfigError("anchor value has wrong dimension");
  Eigen::MatrixXd out(n, t.dim());
  for (Index c = 0; c < t.dim(); ++c) {
    const Eigen::VectorXd col = t.values().col(c);
    const double circulation = col.sum() * 2.0 * pi / n;
    const double scale = col.cwiseAbs().sum() * 2.0 * pi / n;
    if (std::abs(circulation) > tol * scale) {
      throw MultivaluedError("boundary integral of the trace is " + std::to_string(circulation) +
                             ", antiderivative would be multivalued");
    }
    Eigen::VectorXcd coef = spectral::dft(col);
    coef[0] = 0.0;
    for (int k = 1; k < n; ++k) {
      const int w = spectral::wavenumber(k, n);
      if (w == n / 2) coef[k] = 0.0;
      else coef[k] /= cplx(0.0, w);
    }
    Eigen::VectorXd prim = spectral::idft(coef).real();
    prim.array() += anchor_value[c] - prim[anchor];
    out.col(c) = prim;
  }
  return BoundaryTrace(std::move(out), anchor);
}

inline BoundaryTrace integrate_trace(const BoundaryTrace& t, int anchor = 0,
                                     double anchor_value = 0.0, double tol = 1e-8) {
  return integrate_trace(t, anchor, Eigen::VectorXd::Constant(t.dim(), anchor_value), tol);
}

/// Componentwise dot product of a 2-vector trace with a frame direction.
inline Eigen::VectorXd project(const BoundaryTrace& v, const Eigen::MatrixXd& dir) {
  return (v.values().array() * dir.array()).rowwise().sum();
}

// ---------------------------------------------------------------------------
// Gradient integration

/// Potential recovered from a gradient field by path integration.
struct PathIntegral {
  RealField potential;
  /// Mismatch at the far end of each diameter path (path independence).
  double path_mismatch = 0.0;
};

/// Integrates (gx, gy) along the boundary circle from node 0 and then along
/// every diameter from its boundary end. The caller checks curl separately.
inline PathIntegral integrate_gradient(const RealField& gx, const RealField& gy,
                                       double anchor_value = 0.0, double tol = 1e-8) {
  const Domain& d = gx.domain();
  const int nt = d.angular_count();
  const int nr = d.radial_count();
  const int n = d.chebyshev_order();
  const FrameTrace frame = boundary_frame(nt);
  Eigen::VectorXd gt(nt);
  for (int k = 0; k < nt; ++k) {
    gt[k] = frame.tangent(k, 0) * gx[k] + frame.tangent(k, 1) * gy[k];
  }
  const BoundaryTrace edge = integrate_trace(BoundaryTrace::scalar(gt), 0, anchor_value, tol);

  Eigen::VectorXd phi(d.size());
  phi.head(nt) = edge.values().col(0);
  const Eigen::MatrixXd& q = d.chebyshev_cumulative();
  double mismatch = 0.0;
  Eigen::VectorXd slope(n + 1);
  for (int k = 0; k < nt / 2; ++k) {
    const double c = std::cos(d.boundary_theta(k)), s = std::sin(d.boundary_theta(k));
    auto node_of = [&](int j) {
      return j < nr ? d.index(j, k) : d.index(n - j, k + nt / 2);
    };
    for (int j = 0; j <= n; ++j) {
      const Index p = node_of(j);
      slope[j] = c * gx[p] + s * gy[p];
    }
    const Eigen::VectorXd along = q * slope;
    for (int j = 1; j <= n; ++j) {
      const Index p = node_of(j);
      const double value = phi[k] + along[j];
      if (j == n) mismatch = std::max(mismatch, std::abs(value - phi[p]));
      else phi[p] = value;
    }
  }
  return {RealField(d, std::move(phi)), mismatch};
}

/// Scalar curl dv/dx - du/dy.
inline RealField curl(const RealField& gx, const RealField& gy) {
  return differentiate(gy, 1, 0) - differentiate(gx, 0, 1);
}

}  // namespace vlab
