#include "vlab/flow.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vlab;

namespace {

const Domain& disk12() {
  static const Domain d = Domain::disk(12, 48);
  return d;
}

// Stream function r^2 x: u = (2xy, -(3x^2 + y^2)), and for constant mu the
// pressure is -8 mu y.
Vec2 cubic_velocity(double x, double y) { return {2.0 * x * y, -(3.0 * x * x + y * y)}; }

double max_diff(const RealField& a, const RealField& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

BoundaryTrace generic_trace(int n) {
  // velocity of the stream function sin(2x + y) + x y^2 / 2
  return BoundaryTrace::sample_vector(n, [](double x, double y) {
    const double c = std::cos(2.0 * x + y);
    return Vec2{c + x * y, -(2.0 * c + 0.5 * y * y)};
  });
}

}  // namespace

TEST(Stokes, ConstantViscosityPolynomialSolution) {
  const Domain& d = disk12();
  for (double m : {1.0, 2.5}) {
    const ViscosityField mu = ViscosityField::constant(d, m);
    const FlowState s = solve_stokes(d, mu, BoundaryTrace::sample_vector(48, cubic_velocity));
    const VectorField exact = VectorField::sample(d, cubic_velocity);
    EXPECT_LT(max_diff(s.u.x, exact.x), 1e-9);
    EXPECT_LT(max_diff(s.u.y, exact.y), 1e-9);
    const RealField p = RealField::sample(d, [m](double, double y) { return -8.0 * m * y; });
    EXPECT_LT(max_diff(s.p, p), 1e-7 * m);
  }
}

TEST(Stokes, RigidMotionsCarryNoTraction) {
  const Domain& d = disk12();
  const ViscosityField mu = ViscosityField::sample(d, [](double x, double y) {
    return 1.0 + 0.5 * std::exp(-((x - 0.2) * (x - 0.2) + y * y) / 0.3);
  });
  const StokesSolver solver(mu);
  const BoundaryTrace rot = BoundaryTrace::sample_vector(48, [](double x, double y) { return Vec2{-y, x}; });
  const BoundaryTrace shift = BoundaryTrace::sample_vector(48, [](double, double) { return Vec2{0.3, -0.7}; });
  EXPECT_LT(traction(solver.solve(rot), mu).values().cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(traction(solver.solve(shift), mu).values().cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Stokes, VariableViscositySolutionIsEquilibrated) {
  const Domain& d = disk12();
  const ViscosityField mu = ViscosityField::sample(d, [](double x, double) { return 1.0 + x * x; });
  const BoundaryTrace g = generic_trace(48);
  const FlowState s = solve_stokes(d, mu, g);
  EXPECT_LT(divergence(s.u).max_abs(), 1e-8);
  EXPECT_LT((trace(s.u).values() - g.values()).cwiseAbs().maxCoeff(), 1e-10);
  const SymTensorField sig = stress(s, mu);
  const RealField f1 = differentiate(sig.xx, 1, 0) + differentiate(sig.xy, 0, 1);
  const RealField f2 = differentiate(sig.xy, 1, 0) + differentiate(sig.yy, 0, 1);
  const double smax = std::max({sig.xx.max_abs(), sig.xy.max_abs(), sig.yy.max_abs()});
  EXPECT_LT(std::max(f1.max_abs(), f2.max_abs()), 1e-5 * smax);
  // no body force: traction has zero net force and torque
  EXPECT_LT(force_and_torque(traction(s, mu)).cwiseAbs().maxCoeff(), 1e-7 * smax);
  EXPECT_NEAR(integrate_area(s.p), 0.0, 1e-9);
}

TEST(Stokes, RejectsNetFlux) {
  const Domain& d = disk12();
  const ViscosityField mu = ViscosityField::constant(d, 1.0);
  const BoundaryTrace radial = BoundaryTrace::sample_vector(48, [](double x, double y) { return Vec2{x, y}; });
  EXPECT_NEAR(check_flux(radial), 2.0 * pi, 1e-12);
  EXPECT_THROW(solve_stokes(d, mu, radial), IncompatibleDataError);
}

TEST(Stokes, RejectsMismatchedTrace) {
  const Domain& d = disk12();
  const ViscosityField mu = ViscosityField::constant(d, 1.0);
  EXPECT_THROW(solve_stokes(d, mu, generic_trace(32)), ConfigError);
}

TEST(NavierStokes, RotationIsAnExactSolution) {
  // (u . grad) u = -grad(r^2 / 2) is absorbed by the pressure.
  const Domain& d = disk12();
  const ViscosityField mu = ViscosityField::constant(d, 1.0);
  const BoundaryTrace rot = BoundaryTrace::sample_vector(48, [](double x, double y) { return Vec2{-y, x}; });
  const NseResult r = solve_nse(StokesSolver(mu), rot);
  EXPECT_TRUE(r.converged);
  const VectorField exact = VectorField::sample(d, [](double x, double y) { return Vec2{-y, x}; });
  EXPECT_LT(max_diff(r.state.u.x, exact.x), 1e-9);
  EXPECT_LT(max_diff(r.state.u.y, exact.y), 1e-9);
  const RealField p = RealField::sample(d, [](double x, double y) { return 0.5 * (x * x + y * y) - 0.25; });
  EXPECT_LT(max_diff(r.state.p, p), 1e-7);
}

TEST(NavierStokes, LargeDataRejected) {
  const Domain& d = Domain::disk(8, 32);
  const ViscosityField mu = ViscosityField::constant(d, 0.01);
  BoundaryTrace g = generic_trace(32);
  g.values() *= 50.0;
  EXPECT_THROW(solve_nse(StokesSolver(mu), g), SolverError);
}

TEST(NavierStokes, SmallDataLinearizesAtFirstOrder) {
  const Domain& d = disk12();
  const ViscosityField mu = ViscosityField::sample(d, [](double x, double) { return 1.0 + x * x; });
  const LinearizationReport rep = linearization_experiment(mu, generic_trace(48), {1e-1, 5e-2, 2.5e-2});
  ASSERT_EQ(rep.rows.size(), 3u);
  ASSERT_TRUE(rep.slope_traction.has_value());
  ASSERT_TRUE(rep.slope_interior.has_value());
  EXPECT_NEAR(*rep.slope_traction, 1.0, 0.1);
  EXPECT_NEAR(*rep.slope_interior, 1.0, 0.1);
  for (const auto& row : rep.rows) EXPECT_LT(row.err_velocity, 1e-9);
}

TEST(NavierStokes, LinearizationValidatesEpsList) {
  const Domain& d = Domain::disk(6, 16);
  const ViscosityField mu = ViscosityField::constant(d, 1.0);
  EXPECT_THROW(linearization_experiment(mu, generic_trace(16), {1e-2, 1e-1}), ConfigError);
  EXPECT_THROW(linearization_experiment(mu, generic_trace(16), {1e-1, -1e-2}), ConfigError);
}

TEST(Slope, LogLogFitIgnoresFloor) {
  const std::vector<double> x{1.0, 0.5, 0.25, 0.125};
  const std::vector<double> y{1.0, 0.25, 0.0625, 1e-14};
  ASSERT_TRUE(loglog_slope(x, y, 1e-12).has_value());
  EXPECT_NEAR(*loglog_slope(x, y, 1e-12), 2.0, 1e-12);
  EXPECT_FALSE(loglog_slope({1.0}, {1.0}).has_value());
}
