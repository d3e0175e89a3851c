#include "vlab/complex_calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace vlab;

namespace {

using CFun = std::function<cplx(cplx)>;

const Domain& disk16() {
  static const Domain d = Domain::disk(16, 64);
  return d;
}

const cplx I(0.0, 1.0);

cplx bump(cplx z) {
  const cplx c(0.3, 0.1);
  return std::exp(-std::norm(z - c) / 0.2);
}

// Area integral over the disk in polar coordinates centred at z, weight
// kernel(psi, rho) per unit rho. The integrand is smooth in both variables,
// so Gauss-Legendre in rho and the trapezoid rule in psi converge fast.
cplx centred_integral(cplx z, const CFun& f, const std::function<cplx(double, double)>& kernel) {
  const auto [gx, gw] = spectral::gauss_legendre(48);
  const int na = 192;
  cplx sum = 0.0;
  for (int a = 0; a < na; ++a) {
    const double psi = 2.0 * pi * a / na;
    const cplx e = std::polar(1.0, psi);
    const double b = (std::conj(z) * e).real();
    const double rmax = -b + std::sqrt(b * b + 1.0 - std::norm(z));
    for (Index q = 0; q < gx.size(); ++q) {
      const double rho = 0.5 * rmax * (gx[q] + 1.0);
      sum += 0.5 * rmax * gw[q] * f(z + rho * e) * kernel(psi, rho);
    }
  }
  return sum * (2.0 * pi / na);
}

// T f(z) = -(1/pi) int f e^{-i psi} d rho d psi
cplx solid_cauchy_oracle(cplx z, const CFun& f) {
  return -centred_integral(z, f, [](double psi, double) { return std::polar(1.0, -psi); }) / pi;
}

// K2 f(z) = (1/pi) int f e^{-2 i psi} rho d rho d psi
cplx k2_oracle(cplx z, const CFun& f) {
  return centred_integral(z, f, [](double psi, double rho) { return rho * std::polar(1.0, -2.0 * psi); }) / pi;
}

ComplexField sample(const Domain& d, const CFun& f) {
  return ComplexField::sample(d, [&](double x, double y) { return f(cplx(x, y)); });
}

// interior nodes at radius below 0.85, every seventh one
std::vector<Index> probe_nodes(const Domain& d) {
  std::vector<Index> out;
  for (Index n = d.angular_count(); n < d.size(); n += 7) {
    if (std::abs(d.z(n)) < 0.85) out.push_back(n);
  }
  return out;
}

}  // namespace

TEST(SolidCauchy, MatchesCentredQuadrature) {
  const Domain& d = disk16();
  const ComplexField t = solid_cauchy(sample(d, bump));
  for (Index n : probe_nodes(d)) {
    EXPECT_LT(std::abs(t[n] - solid_cauchy_oracle(d.z(n), bump)), 1e-9) << "node " << n;
  }
}

TEST(SolidCauchy, TransformOfOneIsZbar) {
  const Domain& d = disk16();
  EXPECT_LT(relative_l2(solid_cauchy(sample(d, [](cplx) { return cplx(1.0); })), zbar_field(d)), 1e-12);
}

TEST(SolidK2, MatchesCentredQuadrature) {
  const Domain& d = disk16();
  const CFun f = [](cplx z) { return bump(z) * (1.0 + z); };
  const ComplexField k = solid_k2(sample(d, f));
  for (Index n : probe_nodes(d)) {
    EXPECT_LT(std::abs(k[n] - k2_oracle(d.z(n), f)), 1e-9) << "node " << n;
  }
}

TEST(SolidK2, SolvesSecondOrderEquation) {
  const Domain& d = disk16();
  const ComplexField f = sample(d, bump);
  EXPECT_LT(relative_l2(wirtinger(solid_k2(f), Kind::zbar, 2), f), 1e-8);
  EXPECT_LT(relative_l2(solid_k2(sample(d, [](cplx) { return cplx(1.0); })),
                        sample(d, [](cplx z) { return 0.5 * std::conj(z) * std::conj(z); })),
            1e-12);
}

TEST(SolveDbar, KindZIsConjugatedKindZbar) {
  const Domain& d = disk16();
  const ComplexField f = sample(d, [](cplx z) { return bump(z) * (z + 2.0 * I); });
  for (int order : {1, 2}) {
    const ComplexField a = solve_dbar(f, Kind::z, order);
    const ComplexField b = conj(solve_dbar(conj(f), Kind::zbar, order));
    EXPECT_LT((a.values() - b.values()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(relative_l2(wirtinger(a, Kind::z, order), f), 1e-8);
  }
}

TEST(SolveDbar, DensityRefinementConverges) {
  const Domain& d = disk16();
  const ComplexField f = sample(d, bump);
  double prev = INFINITY;
  for (int q : {2, 4, 8, 16}) {
    const double e = relative_l2(wirtinger(solve_dbar(f, Kind::zbar, 2, q), Kind::zbar, 2), f);
    EXPECT_LT(e, prev);
    prev = e;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(BoundaryIntegrals, CauchyIntegralMatchesTrapezoid) {
  const Domain& d = disk16();
  const int nt = d.angular_count();
  const auto F = [](double th) { return std::polar(1.0, -2.0 * th) + 0.5 * std::polar(1.0, 3.0 * th) + 0.25; };
  Eigen::VectorXcd tr(nt);
  for (int k = 0; k < nt; ++k) tr[k] = F(d.boundary_theta(k));
  const ComplexField c = cauchy_integral(d, tr);
  for (Index n : probe_nodes(d)) {
    const cplx z = d.z(n);
    cplx s = 0.0;
    const int m = 512;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * pi * k / m;
      const cplx zeta = std::polar(1.0, th);
      s += F(th) / (zeta - z) * I * zeta;
    }
    s *= (2.0 * pi / m) / (2.0 * pi * I);
    EXPECT_LT(std::abs(c[n] - s), 1e-10);
  }
}

TEST(BoundaryIntegrals, LogIntegralDerivativeMatchesTrapezoid) {
  // d_z L[c](z) = oint c(zeta) / (z - zeta) dzetabar is single valued.
  const Domain& d = disk16();
  const int nt = d.angular_count();
  const auto c = [](double th) { return std::polar(1.0, 2.0 * th) + cplx(0.3, -0.2) * std::polar(1.0, -th) + 0.7; };
  Eigen::VectorXcd tr(nt);
  for (int k = 0; k < nt; ++k) tr[k] = c(d.boundary_theta(k));
  const ComplexField lz = wirtinger(log_integral(d, tr), Kind::z, 1);
  const ComplexField mzb = wirtinger(conj_log_integral(d, tr), Kind::zbar, 1);
  for (Index n : probe_nodes(d)) {
    const cplx z = d.z(n);
    cplx s = 0.0, t = 0.0;
    const int m = 512;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * pi * k / m;
      const cplx zeta = std::polar(1.0, th);
      s += c(th) / (z - zeta) * std::conj(I * zeta);
      t += c(th) / std::conj(z - zeta) * (I * zeta);
    }
    s *= 2.0 * pi / m;
    t *= 2.0 * pi / m;
    EXPECT_LT(std::abs(lz[n] - s), 1e-9);
    EXPECT_LT(std::abs(mzb[n] - t), 1e-9);
  }
}

TEST(Gauss, AreaAndBoundaryAgree) {
  const Domain& d = disk16();
  const ComplexField w = sample(d, [](cplx z) { return std::exp(std::conj(z)) * z + std::norm(z) * std::sin(z); });
  for (Kind k : {Kind::zbar, Kind::z}) {
    const GaussReport g = gauss_residual(w, k);
    EXPECT_LT(g.residual, 1e-11) << to_string(k);
    EXPECT_GT(std::abs(g.area), 0.1);
  }
}

TEST(Pompeiu, ReconstructsSmoothFunction) {
  const Domain& d = disk16();
  const ComplexField w = sample(d, [](cplx z) { return bump(z) + std::conj(z) * std::exp(z); });
  for (Kind k : {Kind::zbar, Kind::z}) {
    for (int order : {1, 2}) {
      EXPECT_LT(pompeiu_reconstruct(w, order, k).residual, 1e-9) << to_string(k) << " order " << order;
    }
  }
  EXPECT_THROW(pompeiu_reconstruct(w, 3, Kind::zbar), UnsupportedError);
}

TEST(Pompeiu, HolomorphicFunctionIsItsCauchyIntegral) {
  const Domain& d = disk16();
  const ComplexField w = sample(d, [](cplx z) { return std::exp(z) / (z - 3.0); });
  const PompeiuReport r = pompeiu_reconstruct(w, 1, Kind::zbar);
  EXPECT_LT(r.area_term.max_abs(), 1e-10);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(BiDbar, SolvesCompatiblePair) {
  const Domain& d = disk16();
  // w0 = e^{zbar} z^2 + zbar sin z
  const ComplexField f = sample(d, [](cplx z) { return 2.0 * std::exp(std::conj(z)) - std::conj(z) * std::sin(z); });
  const ComplexField g = sample(d, [](cplx z) { return std::exp(std::conj(z)) * z * z; });
  const BiDbarResult r = solve_bi_dbar2(f, g);
  EXPECT_LT(r.compatibility, 1e-9);
  EXPECT_LT(relative_l2(wirtinger(r.w, Kind::z, 2), f), 1e-8);
  EXPECT_LT(relative_l2(wirtinger(r.w, Kind::zbar, 2), g), 1e-8);
}

TEST(BiDbar, PolynomialPair) {
  const Domain& d = disk16();
  const ComplexField z = z_field(d), zb = zbar_field(d);
  const BiDbarResult r = solve_bi_dbar2(zb * zb, z * z);
  EXPECT_LT(relative_l2(wirtinger(r.w, Kind::z, 2), zb * zb), 1e-10);
  EXPECT_LT(relative_l2(wirtinger(r.w, Kind::zbar, 2), z * z), 1e-10);
}

TEST(BiDbar, RejectsIncompatiblePair) {
  const Domain& d = disk16();
  const ComplexField zb = zbar_field(d);
  EXPECT_THROW(solve_bi_dbar2(zb * zb, ComplexField(d)), IncompatibleDataError);
}
