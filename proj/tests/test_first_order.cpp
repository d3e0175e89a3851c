#include "vlab/first_order.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vlab;

namespace {

const Domain& disk12() {
  static const Domain d = Domain::disk(12, 48);
  return d;
}

// Rational viscosities such as 1 + x^2 need this grid for 1e-8 level potentials.
const Domain& disk16() {
  static const Domain d = Domain::disk(16, 64);
  return d;
}

// Fourth-order residuals at 1e-8 need the coarse grid (roundoff grows like N^8).
const Domain& disk8() {
  static const Domain d = Domain::disk(8, 32);
  return d;
}

ViscosityField quadratic(const Domain& d) {
  return ViscosityField::sample(d, [](double x, double) { return 1.0 + x * x; });
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Potentials, ExponentialViscosityHasConstantPair) {
  // mu = e^{kx}: alpha = -k/2, beta = k^2/8
  const Domain& d = disk12();
  const double k = 2.0;
  const PotentialPair p = alpha_beta(ViscosityField::sample(d, [k](double x, double) { return std::exp(k * x); }));
  EXPECT_LT((p.alpha.values().array() + k / 2.0).abs().maxCoeff(), 1e-9);
  EXPECT_LT((p.beta.values().array() - k * k / 8.0).abs().maxCoeff(), 1e-8);
}

TEST(Potentials, QuadraticViscosityAlpha) {
  const Domain& d = disk16();
  const PotentialPair p = alpha_beta(quadratic(d));
  const ComplexField expect = ComplexField::sample(d, [](double x, double) { return cplx(-x / (1.0 + x * x)); });
  EXPECT_LT(max_diff(p.alpha, expect), 1e-10);
}

TEST(Potentials, IdentityHoldsForSeveralFamilies) {
  const Domain& d = disk16();
  const std::vector<std::function<double(double, double)>> fams{
      [](double x, double) { return 1.0 + x * x; },
      [](double x, double y) { return std::exp(0.7 * x - 0.4 * y); },
      [](double x, double y) { return 1.0 + 0.3 * std::pow(1.0 - x * x - y * y, 2); },
  };
  for (const auto& f : fams) {
    EXPECT_LT(check_ab_identity(alpha_beta(ViscosityField::sample(d, f))), 1e-8);
  }
}

TEST(Potentials, VStructure) {
  const Domain& d = disk12();
  const PotentialPair p = alpha_beta(quadratic(d));
  const MatrixField v = assemble_V(p);
  ASSERT_EQ(static_cast<Index>(v.at.size()), d.size());
  const Eigen::Matrix4cd& m = v.at[100];
  EXPECT_EQ(m(0, 0), p.alpha[100]);
  EXPECT_EQ(m(0, 3), std::conj(p.beta[100]));
  EXPECT_EQ(m(1, 0), cplx(-1.0));
  EXPECT_EQ(m(3, 2), cplx(-1.0));
  EXPECT_EQ(m.row(2), m.row(0));
  EXPECT_EQ(m(1, 1), cplx(0.0));
}

TEST(Lift, PolynomialPotential) {
  // Phi = |z|^4 = z^2 zbar^2
  const Domain& d = disk12();
  const RealField phi = RealField::sample(d, [](double x, double y) { return std::pow(x * x + y * y, 2); });
  const FirstOrderState u = lift_to_U(phi);
  const auto zf = [](double x, double y) { return cplx(x, y); };
  const ComplexField z = ComplexField::sample(d, zf);
  const ComplexField zb = conj(z);
  EXPECT_LT(max_diff(u.u1, cplx(4.0) * zb), 1e-9);
  EXPECT_LT(max_diff(u.u2, cplx(2.0) * (zb * zb)), 1e-9);
  EXPECT_LT(max_diff(u.u3, cplx(4.0) * z), 1e-9);
  EXPECT_LT(max_diff(u.u4, cplx(2.0) * (z * z)), 1e-9);
  const LiftDefects e = lift_defects(u);
  EXPECT_LT(std::max({e.d12, e.d34, e.compat}), 1e-7);
}

TEST(Lift, PlateSolutionSatisfiesFirstOrderSystem) {
  // exact potentials of mu = 1 + x^2, which this grid does not resolve
  const Domain& d = disk8();
  const PotentialPair p{ComplexField::sample(d, [](double x, double) { return cplx(-x / (1.0 + x * x)); }),
                        ComplexField::sample(d, [](double x, double) {
                          return cplx((6.0 * x * x - 2.0) / (8.0 * std::pow(1.0 + x * x, 2)));
                        })};
  const RealField phi = RealField::sample(d, [](double x, double y) { return y * y - x * x - x * x * x * x / 3.0; });
  EXPECT_LT(dv_residual(lift_to_U(phi), assemble_V(p)), 1e-8);
  // not a solution: residual is order one
  const RealField off = RealField::sample(d, [](double x, double y) { return x * x * y * y; });
  EXPECT_GT(dv_residual(lift_to_U(off), assemble_V(p)), 0.1);
}

TEST(Lift, PotentialRoundTrip) {
  const Domain& d = Domain::disk(16, 64);
  const RealField phi = RealField::sample(d, [](double x, double y) { return std::exp(x) * std::sin(y) + std::cos(2.0 * x * y); });
  const FirstOrderState u = lift_to_U(phi);
  const ComplexField w = potential_from_U(u);
  const FirstOrderState v = lift_to_U(w);
  EXPECT_LT(relative_l2(v.u2, u.u2), 1e-7);
  EXPECT_LT(relative_l2(v.u4, u.u4), 1e-7);
  EXPECT_LT(relative_l2(v.u1, u.u1), 1e-6);
}

TEST(Lift, RejectsNonLift) {
  const Domain& d = disk12();
  FirstOrderState u = lift_to_U(RealField::sample(d, [](double x, double y) { return x * x * y; }));
  u.u1 = u.u1 + ComplexField::sample(d, [](double, double) { return cplx(1.0); });
  EXPECT_THROW(potential_from_U(u), IncompatibleDataError);
}

TEST(MuFromAlpha, RecoversViscosity) {
  const Domain& d = disk16();
  const ViscosityField mu = quadratic(d);
  const ViscosityField rec = mu_from_alpha(alpha_beta(mu).alpha, mu.boundary_value());
  EXPECT_LT((rec.field().values() - mu.field().values()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(MuFromAlpha, RejectsNonGradient) {
  const Domain& d = disk12();
  const ComplexField ix = ComplexField::sample(d, [](double x, double) { return cplx(0.0, x); });
  EXPECT_THROW(mu_from_alpha(ix, ViscosityField::constant(d, 1.0).boundary_value()), IncompatibleDataError);
}

TEST(MuFromAlpha, RejectsBoundaryMismatch) {
  const Domain& d = disk16();
  const ViscosityField mu = quadratic(d);
  const ViscosityField other = ViscosityField::constant(d, 1.0);
  EXPECT_THROW(mu_from_alpha(alpha_beta(mu).alpha, other.boundary_value()), IncompatibleDataError);
}

TEST(Transport, DiscrepancyAgainstConstantViscosity) {
  // alpha1 = -1 for e^{2x}, alpha2 = 0: discrepancy alpha1^2 / 2 = 1/2
  const Domain& d = Domain::disk(16, 64);
  const PotentialPair p1 = alpha_beta(ViscosityField::sample(d, [](double x, double) { return std::exp(2.0 * x); }));
  const PotentialPair p2 = alpha_beta(ViscosityField::constant(d, 1.0));
  const TransportResult t = transport_factor(p1, p2);
  EXPECT_LT(t.factor.residual, 1e-8);
  EXPECT_LT((t.discrepancy.values().array() - 0.5).abs().maxCoeff(), 1e-8);
}

TEST(Transport, DiscrepancyIsHalfDifferenceOfSquares) {
  const Domain& d = Domain::disk(16, 64);
  const PotentialPair p1 = alpha_beta(quadratic(d));
  const PotentialPair p2 = alpha_beta(ViscosityField::sample(d, [](double x, double y) { return std::exp(0.3 * x + 0.5 * y); }));
  const TransportResult t = transport_factor(p1, p2);
  const ComplexField expect = cplx(0.5) * (p1.alpha * p1.alpha - p2.alpha * p2.alpha);
  EXPECT_LT(max_diff(t.discrepancy, expect), 1e-7);
}
