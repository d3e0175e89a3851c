#include "vlab/inverse_lab.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace vlab;

namespace {

const Domain& disk8() {
  static const Domain d = Domain::disk(8, 32);
  return d;
}

ViscosityField bump(const Domain& d, double c) {
  return ViscosityField::sample(d, [c](double x, double y) {
    const double s = 1.0 - x * x - y * y;
    return 1.0 + c * s * s;
  });
}

}  // namespace

TEST(Inputs, TrigonometricFamilyIsFluxFree) {
  const auto in = trigonometric_inputs(32, 8);
  ASSERT_EQ(in.size(), 8u);
  for (const auto& g : in) {
    EXPECT_EQ(g.size(), 32);
    EXPECT_LT(std::abs(check_flux(g)), 1e-13);
  }
  // (cos t, 0) loses its normal mean: the first input is not the raw trace
  EXPECT_GT(std::abs(in[0].values()(0, 0) - 1.0), 0.1);
}

TEST(Noise, RmsIsExactlyTheRequestedLevel) {
  BoundaryTrace t = trigonometric_inputs(64, 3)[2];
  const BoundaryTrace clean = t;
  std::mt19937_64 rng(11);
  perturb(t, 0.01, rng);
  EXPECT_NEAR(rms(t.values() - clean.values()), 0.01 * rms(clean.values()), 1e-15);
  BoundaryTrace same = clean;
  perturb(same, 0.0, rng);
  EXPECT_EQ(same.values(), clean.values());
}

TEST(Synth, SeededAndComplete) {
  const Domain& d = disk8();
  const auto in = trigonometric_inputs(32, 4);
  SynthOptions o;
  o.noise = 0.01;
  o.seed = 5;
  const CauchyDataset a = synth_dataset(bump(d, 0.3), in, Equation::stokes, o);
  const CauchyDataset b = synth_dataset(bump(d, 0.3), in, Equation::stokes, o);
  ASSERT_EQ(a.data.size(), 4u);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    EXPECT_TRUE(a.failures[i].empty());
    EXPECT_EQ(a.data[i].traction.values(), b.data[i].traction.values());
  }
  o.seed = 6;
  const CauchyDataset c = synth_dataset(bump(d, 0.3), in, Equation::stokes, o);
  EXPECT_NE(a.data[0].traction.values(), c.data[0].traction.values());
  EXPECT_EQ(a.radial, 8);
  EXPECT_EQ(a.angular, 32);
}

TEST(Synth, FailedDatumIsRecorded) {
  const Domain& d = disk8();
  std::vector<BoundaryTrace> in = trigonometric_inputs(32, 1);
  in.push_back(BoundaryTrace::sample_vector(32, [](double x, double y) { return Vec2{x, y}; }));
  const CauchyDataset ds = synth_dataset(ViscosityField::constant(d, 1.0), in, Equation::stokes);
  EXPECT_TRUE(ds.failures[0].empty());
  EXPECT_FALSE(ds.failures[1].empty());
  EXPECT_THROW(cauchy_gap(ds, ds), SolverError);
}

TEST(Gap, ZeroOnItselfAndSymmetric) {
  const Domain& d = disk8();
  const auto in = trigonometric_inputs(32, 4);
  const CauchyDataset a = synth_dataset(ViscosityField::constant(d, 1.0), in, Equation::stokes);
  const CauchyDataset b = synth_dataset(bump(d, 0.3), in, Equation::stokes);
  EXPECT_EQ(cauchy_gap(a, a), 0.0);
  EXPECT_DOUBLE_EQ(cauchy_gap(a, b), cauchy_gap(b, a));
  EXPECT_GT(cauchy_gap(a, b), 1e-2);
}

TEST(Gap, IgnoresPressureConstant) {
  const FrameTrace f = boundary_frame(32);
  EXPECT_LT(l2_modulo_pressure(2.5 * f.normal), 1e-14);
  EXPECT_GT(l2_modulo_pressure(f.tangent), 1.0);
}

TEST(Gap, RejectsMismatchedInputs) {
  const Domain& d = disk8();
  const ViscosityField mu = ViscosityField::constant(d, 1.0);
  const CauchyDataset a = synth_dataset(mu, trigonometric_inputs(32, 4), Equation::stokes);
  auto in = trigonometric_inputs(32, 4);
  in[1].values() *= 2.0;
  const CauchyDataset b = synth_dataset(mu, in, Equation::stokes);
  EXPECT_THROW(cauchy_gap(a, b), IncompatibleDataError);
  const CauchyDataset c = synth_dataset(mu, trigonometric_inputs(32, 3), Equation::stokes);
  EXPECT_THROW(cauchy_gap(a, c), IncompatibleDataError);
}

TEST(Gap, ComparesAcrossGrids) {
  const auto fine = Domain::disk(12, 48);
  const CauchyDataset a = synth_dataset(ViscosityField::constant(disk8(), 1.0), trigonometric_inputs(32, 4), Equation::stokes);
  const CauchyDataset b = synth_dataset(ViscosityField::constant(fine, 1.0), trigonometric_inputs(48, 4), Equation::stokes);
  EXPECT_LT(cauchy_gap(a, b), 1e-6);
}

TEST(Resample, TrigonometricInterpolationIsExact) {
  const BoundaryTrace t = trigonometric_inputs(16, 6)[5];
  const BoundaryTrace r = resample(resample(t, 40), 16);
  EXPECT_LT((r.values() - t.values()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Reconstruct, NoiselessBumpOnCoarseGrid) {
  const Domain& d = disk8();
  const CauchyDataset data = synth_dataset(bump(d, 0.3), trigonometric_inputs(32, 4), Equation::stokes);
  const MisfitFunctional j(data, d, bump_family());
  EXPECT_LT(*j.misfit(Eigen::VectorXd::Constant(1, 0.3)), 1e-20);
  EXPECT_FALSE(j.misfit(Eigen::VectorXd::Constant(1, -2.0)).has_value());
  const ReconstructionResult r = reconstruct_mu(j, 0.0);
  EXPECT_NEAR(r.params[0], 0.3, 1e-4);
  EXPECT_TRUE(r.mu.has_value());
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
}

TEST(Reconstruct, RegularizationShrinksTheEstimate) {
  const Domain& d = disk8();
  const CauchyDataset data = synth_dataset(bump(d, 0.3), trigonometric_inputs(32, 4), Equation::stokes);
  const MisfitFunctional j(data, d, bump_family());
  const double weak = reconstruct_mu(j, 1e-6).params[0];
  const double strong = reconstruct_mu(j, 1.0).params[0];
  EXPECT_LT(std::abs(strong), std::abs(weak));
}

TEST(LCurve, CornerOfAnLShape) {
  std::vector<LCurvePoint> pts;
  const std::vector<std::pair<double, double>> xy{{1e-3, 1e3}, {1.1e-3, 1e2}, {1.2e-3, 10.0}, {1.3e-3, 1.0},
                                                  {1e-1, 0.9}, {10.0, 0.8}};
  for (const auto& [r, n] : xy) pts.push_back({0.0, r, n, Eigen::VectorXd()});
  EXPECT_EQ(lcurve_corner(pts), 3u);
  EXPECT_EQ(lcurve_corner({pts[0], pts[1]}), 0u);
}

TEST(Probe, RejectsDifferentBoundaryJets) {
  const Domain& d = disk8();
  const ViscosityField first_order = ViscosityField::sample(d, [](double x, double y) {
    return 1.0 + 0.3 * (1.0 - x * x - y * y);
  });
  EXPECT_THROW(uniqueness_probe(ViscosityField::constant(d, 1.0), first_order, trigonometric_inputs(32, 2)),
               IncompatibleDataError);
}

TEST(Probe, SeparatesViscositiesWithEqualJets) {
  const Domain& d = disk8();
  const ProbeReport r = uniqueness_probe(ViscosityField::constant(d, 1.0), bump(d, 0.3), trigonometric_inputs(32, 4));
  EXPECT_GT(r.gap_stokes, 1e-2);
  EXPECT_FALSE(r.gap_nse.has_value());
  EXPECT_NEAR(r.mu_distance, 0.3, 0.05);
  EXPECT_GT(r.discrepancy, 0.0);
}

TEST(Dataset, SaveLoadRoundTrip) {
  const Domain& d = disk8();
  std::vector<BoundaryTrace> in = trigonometric_inputs(32, 2);
  in.push_back(BoundaryTrace::sample_vector(32, [](double x, double y) { return Vec2{x, y}; }));
  SynthOptions o;
  o.noise = 0.02;
  o.mu_tag = "bump(c=0.3)";
  const CauchyDataset a = synth_dataset(bump(d, 0.3), in, Equation::stokes, o);
  const auto dir = std::filesystem::temp_directory_path() / "vlab-test-dataset";
  std::filesystem::remove_all(dir);
  save_dataset(a, dir);
  const CauchyDataset b = load_dataset(dir);
  EXPECT_EQ(b.mu_tag, a.mu_tag);
  EXPECT_EQ(b.radial, 8);
  EXPECT_EQ(b.angular, 32);
  EXPECT_DOUBLE_EQ(b.noise, 0.02);
  EXPECT_EQ(b.failures, a.failures);
  ASSERT_EQ(b.data.size(), 3u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(b.data[i].velocity.values(), a.data[i].velocity.values());
    EXPECT_EQ(b.data[i].traction.values(), a.data[i].traction.values());
  }
  EXPECT_FALSE(b.failures[2].empty());
  std::filesystem::remove(dir / "datum_1.csv");
  EXPECT_THROW(load_dataset(dir), ConfigError);
  EXPECT_THROW(load_dataset(dir / "missing"), ConfigError);
}

TEST(Reconstruct, ConstantTruthGivesZero) {
  const Domain& d = disk8();
  const CauchyDataset data = synth_dataset(ViscosityField::constant(d, 1.0), trigonometric_inputs(32, 4), Equation::stokes);
  const MisfitFunctional j(data, d, bump_family());
  EXPECT_NEAR(reconstruct_mu(j, 0.0).params[0], 0.0, 1e-4);
}

TEST(Probe, EqualViscositiesAreIndistinguishable) {
  const Domain& d = disk8();
  const ProbeReport r = uniqueness_probe(bump(d, 0.3), bump(d, 0.3), trigonometric_inputs(32, 3));
  EXPECT_EQ(r.gap_stokes, 0.0);
  EXPECT_EQ(r.mu_distance, 0.0);
}
