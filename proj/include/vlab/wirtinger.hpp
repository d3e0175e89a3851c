#pragma once

// Wirtinger derivatives on the grid: d/dz = (d/dx - i d/dy)/2 and
// d/dzbar = (d/dx + i d/dy)/2, applied by repeated collocation.

#include "vlab/domain.hpp"
#include "vlab/errors.hpp"

namespace vlab {

enum class Kind { z, zbar };

inline const char* to_string(Kind k) { return k == Kind::z ? "z" : "zbar"; }

/// d^a/dz^a d^b/dzbar^b f, a + b <= 4.
inline ComplexField wirtinger_mixed(const ComplexField& f, int a, int b) {
  if (a < 0 || b < 0 || a + b > 4) throw UnsupportedError("Wirtinger order above 4");
  const Domain& d = f.domain();
  Eigen::VectorXcd v = f.values();
  const cplx i(0.0, 1.0);
  for (int s = 0; s < a; ++s) v = 0.5 * (apply_real(d.dx(), v) - i * apply_real(d.dy(), v));
  for (int s = 0; s < b; ++s) v = 0.5 * (apply_real(d.dx(), v) + i * apply_real(d.dy(), v));
  return ComplexField(d, std::move(v));
}

inline ComplexField wirtinger_mixed(const RealField& f, int a, int b) {
  return wirtinger_mixed(to_complex(f), a, b);
}

/// d/dz or d/dzbar applied `order` times.
inline ComplexField wirtinger(const ComplexField& f, Kind kind, int order = 1) {
  if (order < 1 || order > 2) throw UnsupportedError("wirtinger order must be 1 or 2");
  return kind == Kind::z ? wirtinger_mixed(f, order, 0) : wirtinger_mixed(f, 0, order);
}

inline ComplexField wirtinger(const RealField& f, Kind kind, int order = 1) {
  return wirtinger(to_complex(f), kind, order);
}

/// Max modulus over nodes off the boundary circle.
inline double interior_max(const ComplexField& f) {
  const Index nt = f.domain().angular_count();
  return f.values().tail(f.values().size() - nt).cwiseAbs().maxCoeff();
}

}  // namespace vlab
