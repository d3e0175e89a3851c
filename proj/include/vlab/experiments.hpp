#pragma once

// Config-driven experiments shared by the command-line runner and the
// acceptance binary. Each run_* reads its keys, checks that no unknown key
// is left, computes, and returns a Report.

#include "vlab/complex_calculus.hpp"
#include "vlab/config.hpp"
#include "vlab/equivalence.hpp"
#include "vlab/first_order.hpp"
#include "vlab/flow.hpp"
#include "vlab/inverse_lab.hpp"
#include "vlab/plate.hpp"
#include "vlab/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace vlab {

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline Domain domain_of(Resolution r) { return Domain::disk(r.radial, r.angular); }

inline std::vector<int> int_list(const Config& c, const std::string& key, std::vector<int> def) {
  std::vector<double> d(def.begin(), def.end());
  std::vector<int> out;
  for (double v : c.get_list(key, d)) {
    if (v != std::floor(v) || v < 4 || v > 40) throw ConfigError("key '" + key + "': bad radial count");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

/// max |a - b| / max |b| over both components.
inline double rel_max(const VectorField& a, const VectorField& b) {
  const double e = std::max((a.x - b.x).max_abs(), (a.y - b.y).max_abs());
  const double s = std::max(b.x.max_abs(), b.y.max_abs());
  return s > 0.0 ? e / s : e;
}

inline double rel_l2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double s = b.norm();
  return s > 0.0 ? (a - b).norm() / s : (a - b).norm();
}

/// True when every entry is strictly below its predecessor.
inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return v.size() >= 2;
}

inline Plot loglog_plot(std::string name, std::string title, std::string xlabel, std::string ylabel) {
  Plot p;
  p.name = std::move(name);
  p.title = std::move(title);
  p.xlabel = std::move(xlabel);
  p.ylabel = std::move(ylabel);
  return p;
}

/// Fitted power law through the geometric mean of the points, for plotting.
inline Series fitted_line(const std::string& name, const std::vector<double>& x,
                          const std::vector<double>& y, double slope) {
  double lx = 0, ly = 0;
  for (std::size_t i = 0; i < x.size(); ++i) lx += std::log(x[i]), ly += std::log(y[i]);
  lx /= x.size();
  ly /= y.size();
  Series s{name, {}, {}, true};
  for (double xi : x) {
    s.x.push_back(xi);
    s.y.push_back(std::exp(ly + slope * (std::log(xi) - lx)));
  }
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// forward-stokes

struct ManufacturedStokes {
  std::string name;
  std::function<double(double, double)> mu;
  std::function<Vec2(double, double)> u;
  std::function<double(double, double)> p;  // up to a constant
};

/// The three closed-form cases: (x, -y) with p = 2x^2 and mu = 1 + x^2,
/// (y^2, 0) with p = 2 mu0 x, and the rigid rotation (-y, x) with p = 0.
inline std::vector<ManufacturedStokes> manufactured_stokes_cases(double mu0) {
  return {
      {"xy", [](double x, double) { return 1.0 + x * x; },
       [](double x, double y) { return Vec2{x, -y}; }, [](double x, double) { return 2.0 * x * x; }},
      {"shear", [mu0](double, double) { return mu0; },
       [](double, double y) { return Vec2{y * y, 0.0}; }, [mu0](double x, double) { return 2.0 * mu0 * x; }},
      {"rotation", [](double x, double) { return 1.0 + x * x; },
       [](double x, double y) { return Vec2{-y, x}; }, [](double, double) { return 0.0; }},
  };
}

struct StokesCaseError {
  double velocity = 0.0, pressure = 0.0, traction = 0.0, seconds = 0.0;
};

inline StokesCaseError run_manufactured_case(const ManufacturedStokes& c, Resolution r) {
  const Domain d = detail::domain_of(r);
  const auto t0 = std::chrono::steady_clock::now();
  const ViscosityField mu = ViscosityField::sample(d, c.mu);
  const BoundaryTrace g = BoundaryTrace::sample_vector(d.angular_count(), c.u);
  const FlowState s = solve_stokes(d, mu, g);
  StokesCaseError e;
  e.seconds = detail::seconds_since(t0);
  const VectorField ue = VectorField::sample(d, c.u);
  e.velocity = detail::rel_max(s.u, ue);
  RealField pe = RealField::sample(d, c.p);
  const double mean = d.weights().dot(pe.values()) / pi;
  pe.values().array() -= mean;
  e.pressure = (s.p - pe).max_abs() / std::max(1.0, pe.max_abs());
  const FlowState exact{ue, pe};
  e.traction = (traction(s, mu).values() - traction(exact, mu).values()).cwiseAbs().maxCoeff();
  return e;
}

inline Report run_forward_stokes_manufactured(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const double tol = cfg.get_double("stokes.tolerance", 1e-6);
  const double max_seconds = cfg.get_double("stokes.max_seconds", 30.0);
  const double mu0 = cfg.get_double("stokes.mu0", 1.0);
  const std::vector<int> ladder = detail::int_list(cfg, "stokes.refinements", {4, 6, 8});
  cfg.check_consumed();

  Report rep;
  rep.kind = "forward-stokes";
  rep.summary = "manufactured Stokes solutions";
  Table t{"cases", {"case", "nr", "nt", "err_velocity", "err_pressure", "err_traction", "seconds"}, {}};
  for (const auto& c : manufactured_stokes_cases(mu0)) {
    const StokesCaseError e = run_manufactured_case(c, res);
    t.add({c.name, std::to_string(res.radial), std::to_string(res.angular), fmt(e.velocity),
           fmt(e.pressure), fmt(e.traction), fmt(e.seconds)});
    std::vector<double> h, err;
    for (int nr : ladder) {
      const StokesCaseError el = run_manufactured_case(c, {nr, 4 * nr});
      t.add({c.name, std::to_string(nr), std::to_string(4 * nr), fmt(el.velocity), fmt(el.pressure),
             fmt(el.traction), fmt(el.seconds)});
      h.push_back(1.0 / nr);
      err.push_back(el.velocity);
    }
    const auto order = loglog_slope(h, err, 1e-13);
    rep.scalars["order_" + c.name] = order.value_or(NAN);
    rep.scalars["err_pressure_" + c.name] = e.pressure;
    rep.scalars["err_traction_" + c.name] = e.traction;
    // Either the error bound at the target grid or second-order convergence.
    if (e.velocity < tol || !order) {
      rep.check("velocity_rel_err_" + c.name, e.velocity, "<", tol);
    } else {
      rep.check("velocity_order_" + c.name, *order, ">=", 2.0);
    }
    rep.check("seconds_" + c.name, e.seconds, "<", max_seconds).timing = true;
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

inline Report run_rigid_traction(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {10, 40});
  const ViscositySpec ma = get_viscosity(cfg, "viscosity", {"quadratic"});
  ViscositySpec gdef{"gaussian"};
  gdef.c = 2.0;
  const ViscositySpec mb = get_viscosity(cfg, "viscosity2", gdef);
  const double tol = cfg.get_double("stokes.tolerance", 1e-8);
  const std::vector<int> ladder = detail::int_list(cfg, "stokes.floor_radial", {8, 10, 12, 16});
  cfg.check_consumed();

  auto run = [&](Resolution r) {
    const Domain d = detail::domain_of(r);
    const int nt = d.angular_count();
    const BoundaryTrace rot = BoundaryTrace::sample_vector(nt, [](double x, double y) { return Vec2{-y, x}; });
    const BoundaryTrace shift = BoundaryTrace::sample_vector(nt, [](double, double) { return Vec2{1.0, 0.0}; });
    const ViscosityField mua = ma.sample(d), mub = mb.sample(d);
    const StokesSolver sa(mua), sb(mub);
    const Eigen::MatrixXd ta = traction(sa.solve(rot), mua).values();
    const Eigen::MatrixXd tb = traction(sb.solve(rot), mub).values();
    const Eigen::MatrixXd ua = traction(sa.solve(shift), mua).values();
    const Eigen::MatrixXd ub = traction(sb.solve(shift), mub).values();
    return std::array<double, 5>{ta.cwiseAbs().maxCoeff(), tb.cwiseAbs().maxCoeff(),
                                 (ta - tb).cwiseAbs().maxCoeff(), ua.cwiseAbs().maxCoeff(),
                                 ub.cwiseAbs().maxCoeff()};
  };

  Report rep;
  rep.kind = "forward-stokes";
  rep.summary = "rigid-motion traction for " + ma.tag() + " and " + mb.tag();
  const auto m = run(res);
  rep.check("rotation_traction_mu1", m[0], "<", tol);
  rep.check("rotation_traction_mu2", m[1], "<", tol);
  rep.check("rotation_traction_difference", m[2], "<", tol);
  rep.check("translation_traction_mu1", m[3], "<", tol);
  rep.check("translation_traction_mu2", m[4], "<", tol);
  Table t{"rigid_traction_floor",
          {"nr", "nt", "rot_mu1", "rot_mu2", "rot_difference", "shift_mu1", "shift_mu2"}, {}};
  for (int nr : ladder) {
    const auto f = run({nr, 4 * nr});
    t.add({std::to_string(nr), std::to_string(4 * nr), fmt(f[0]), fmt(f[1]), fmt(f[2]), fmt(f[3]), fmt(f[4])});
    rep.scalars["floor_nr" + std::to_string(nr)] = std::max({f[0], f[1], f[3], f[4]});
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

// ---------------------------------------------------------------------------
// equivalence-roundtrip

struct RoundTripErrors {
  double m_n = 0.0, m_tt = 0.0, traction = 0.0, velocity = 0.0;
};

/// Stokes datum -> Dirichlet plate data -> plate solve -> Neumann pair,
/// compared with the Neumann pair bridged from the velocity; then both
/// bridges backwards.
inline RoundTripErrors equivalence_round_trip(const ViscosityField& mu, const BoundaryTrace& g) {
  const Domain& d = mu.domain();
  const int nt = d.angular_count();
  const FlowState s = StokesSolver(mu).solve(g);
  const BoundaryTrace t = traction(s, mu);
  const DirichletPlateData dp = dirichlet_bridge_forward(t);
  const NeumannPlateData np = neumann_bridge_forward(g);
  const RealField phi = PlateSolver(mu).solve(dp.phi, dp.phi_n);
  const NeumannPair nn = plate_neumann(phi, mu);
  RoundTripErrors e;
  e.m_n = detail::rel_l2(nn.m_n.values(), np.m_n.values());
  e.m_tt = detail::rel_l2(nn.m_tt.values(), np.m_tt.values());
  const BoundaryTrace tb = dirichlet_bridge_backward(
      {trace(phi), BoundaryTrace::scalar((d.dr() * phi.values()).head(nt))});
  e.traction = detail::rel_l2(tb.values(), t.values());
  // Default anchors: the velocity comes back up to a rigid motion.
  const BoundaryTrace gb = neumann_bridge_backward(nn.m_n, nn.m_tt);
  e.velocity = detail::rel_l2(remove_rigid_motion(gb).values(), remove_rigid_motion(g).values());
  return e;
}

/// Velocity trace of the stream function exp(x) sin(2y).
inline BoundaryTrace stream_input(int nt) {
  return BoundaryTrace::sample_vector(nt, [](double x, double y) {
    return Vec2{2.0 * std::exp(x) * std::cos(2.0 * y), -std::exp(x) * std::sin(2.0 * y)};
  });
}

inline Report run_equivalence_roundtrip(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const ViscositySpec mspec = get_viscosity(cfg, "viscosity", {"quadratic"});
  const double tol = cfg.get_double("roundtrip.tolerance", 1e-4);
  const std::vector<int> ladder = detail::int_list(cfg, "roundtrip.refinements", {8, 10, 12});
  cfg.check_consumed();

  Report rep;
  rep.kind = "equivalence-roundtrip";
  rep.summary = "Stokes/plate round trip, " + mspec.tag();
  auto run = [&](Resolution r) {
    const Domain d = detail::domain_of(r);
    return equivalence_round_trip(mspec.sample(d), stream_input(r.angular));
  };
  const RoundTripErrors e = run(res);
  rep.check("neumann_m_n_rel_l2", e.m_n, "<", tol);
  rep.check("neumann_m_tt_rel_l2", e.m_tt, "<", tol);
  rep.check("traction_back_rel_l2", e.traction, "<", tol);
  rep.check("velocity_back_rel_l2_mod_rigid", e.velocity, "<", tol);
  Table t{"roundtrip", {"nr", "nt", "m_n", "m_tt", "traction", "velocity"}, {}};
  std::vector<double> mn, mtt, h;
  for (int nr : ladder) {
    const RoundTripErrors el = run({nr, 4 * nr});
    t.add({std::to_string(nr), std::to_string(4 * nr), fmt(el.m_n), fmt(el.m_tt), fmt(el.traction),
           fmt(el.velocity)});
    mn.push_back(std::max(el.m_n, el.m_tt));
    h.push_back(nr);
  }
  t.add({std::to_string(res.radial), std::to_string(res.angular), fmt(e.m_n), fmt(e.m_tt),
         fmt(e.traction), fmt(e.velocity)});
  rep.check("decreasing_under_refinement", detail::strictly_decreasing(mn) ? 1.0 : 0.0, "true", 0.0);
  rep.tables.push_back(std::move(t));
  Plot p = detail::loglog_plot("roundtrip", "Neumann pair mismatch", "radial nodes", "relative L2");
  p.series.push_back({"max(M_n, M_tt)", h, mn});
  rep.plots.push_back(std::move(p));
  return rep;
}

// ---------------------------------------------------------------------------
// first-order-residual

inline Report run_ab_identity(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const double tol = cfg.get_double("first_order.tolerance", 1e-8);
  cfg.check_consumed();
  Report rep;
  rep.kind = "first-order-residual";
  rep.summary = "2 beta = dbar alpha + alpha^2";
  const Domain d = detail::domain_of(res);
  ViscositySpec e{"exponential"}, q{"quadratic"}, b{"bump"};
  for (const ViscositySpec& s : {e, q, b}) {
    rep.check("identity_" + s.tag(), check_ab_identity(alpha_beta(s.sample(d))), "<", tol);
  }
  return rep;
}

/// Dirichlet data of exp(x) sin(y) + cos(2xy) for the plate ladder.
inline double plate_data_function(double x, double y) { return std::exp(x) * std::sin(y) + std::cos(2.0 * x * y); }

inline Report run_dv_consistency(const Config& cfg) {
  const ViscositySpec mspec = get_viscosity(cfg, "viscosity", {"quadratic"});
  const std::vector<int> ladder = detail::int_list(cfg, "first_order.refinements", {6, 8, 10, 12});
  const double min_slope = cfg.get_double("first_order.min_slope", 1.0);
  // The z^3 check differentiates four times; it runs on experiment.resolution.
  const Resolution zres = get_resolution(cfg, "experiment.resolution", {8, 32});
  const double tol = cfg.get_double("first_order.tolerance", 1e-8);
  cfg.check_consumed();

  Report rep;
  rep.kind = "first-order-residual";
  rep.summary = "(D+V)U for lifted plate solutions, " + mspec.tag();
  Table t{"dv_residual", {"nr", "nt", "dv_residual", "plate_residual"}, {}};
  std::vector<double> n, r;
  for (int nr : ladder) {
    const Domain d = Domain::disk(nr, 4 * nr);
    const ViscosityField mu = mspec.sample(d);
    const RealField ex = RealField::sample(d, plate_data_function);
    const BoundaryTrace pn = BoundaryTrace::scalar((d.dr() * ex.values()).head(d.angular_count()));
    const RealField phi = PlateSolver(mu).solve(trace(ex), pn);
    const double dv = dv_residual(lift_to_U(phi), assemble_V(alpha_beta(mu)));
    t.add({std::to_string(nr), std::to_string(4 * nr), fmt(dv), fmt(apply_plate(phi, mu).max_abs())});
    n.push_back(nr);
    r.push_back(dv);
  }
  const auto slope = loglog_slope(n, r);
  rep.check("convergence_slope", slope ? -*slope : NAN, ">=", min_slope);
  rep.tables.push_back(std::move(t));
  Plot p = detail::loglog_plot("dv_residual", "(D+V)U residual", "radial nodes", "max residual");
  p.series.push_back({"residual", n, r});
  if (slope) p.series.push_back(detail::fitted_line("fit", n, r, *slope));
  rep.plots.push_back(std::move(p));

  const Domain d = detail::domain_of(zres);
  const ComplexField z3 = ComplexField::sample(d, [](double x, double y) { return std::pow(cplx(x, y), 3); });
  rep.check("cubic_constant_mu", dv_residual(lift_to_U(z3), assemble_V(alpha_beta(ViscosityField::constant(d, 1.0)))),
            "<", tol);
  return rep;
}

inline Report run_discrepancy(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const ViscositySpec m1 = get_viscosity(cfg, "viscosity", {"exponential"});
  const ViscositySpec m2 = get_viscosity(cfg, "viscosity2", {"constant"});
  const double tol = cfg.get_double("first_order.tolerance", 1e-6);
  cfg.check_consumed();
  const Domain d = detail::domain_of(res);
  const PotentialPair p1 = alpha_beta(m1.sample(d)), p2 = alpha_beta(m2.sample(d));
  const TransportResult tr = transport_factor(p1, p2);
  const ComplexField expect =
      cplx(0.5) * (p1.alpha * p1.alpha - p2.alpha * p2.alpha);
  Report rep;
  rep.kind = "first-order-residual";
  rep.summary = "transport discrepancy for " + m1.tag() + " vs " + m2.tag();
  rep.check("discrepancy_minus_half_alpha_sq_diff", (tr.discrepancy - expect).max_abs(), "<", tol);
  rep.scalars["discrepancy_mean_real"] = tr.discrepancy.values().real().mean();
  rep.scalars["transport_residual"] = tr.factor.residual;
  rep.scalars["transport_min_abs"] = tr.factor.r.values().cwiseAbs().minCoeff();
  rep.check("transport_nonvanishing", tr.factor.r.values().cwiseAbs().minCoeff(), ">", 0.0);
  return rep;
}

// ---------------------------------------------------------------------------
// dbar-operators and bi-dbar

inline Report run_dbar_operators(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const int density = cfg.get_int("dbar.density", default_dbar_density);
  const std::vector<double> ladder = cfg.get_list("dbar.densities", {2, 4, 8});
  const double tol = cfg.get_double("dbar.tolerance", 1e-3);
  const double floor = cfg.get_double("dbar.floor", 1e-10);
  cfg.check_consumed();

  const Domain d = detail::domain_of(res);
  struct Named {
    std::string name;
    ComplexField f;
  };
  const std::vector<Named> fs{
      {"one", ComplexField::sample(d, [](double, double) { return cplx(1.0); })},
      {"z", z_field(d)},
      {"zbar", zbar_field(d)},
      {"bump", ComplexField::sample(d, [](double x, double y) {
         return cplx(std::exp(-((x - 0.3) * (x - 0.3) + (y - 0.1) * (y - 0.1)) / 0.2));
       })},
  };
  Report rep;
  rep.kind = "dbar-operators";
  rep.summary = "second-order solid operator, density " + std::to_string(density);
  Table t{"dbar_density", {"function", "density", "rel_residual_order2", "rel_residual_order1"}, {}};
  auto residual = [&](const ComplexField& f, int q, int order) {
    const ComplexField u = solve_dbar(f, Kind::zbar, order, q);
    return relative_l2(wirtinger(u, Kind::zbar, order), f);
  };
  Plot p = detail::loglog_plot("dbar_density", "d-bar residual vs density", "density", "relative L2");
  for (const auto& nf : fs) {
    rep.check("residual_" + nf.name, residual(nf.f, density, 2), "<", tol);
    std::vector<double> q, e;
    for (double qd : ladder) {
      const int qi = static_cast<int>(qd);
      q.push_back(qd);
      e.push_back(residual(nf.f, qi, 2));
      t.add({nf.name, std::to_string(qi), fmt(e.back()), fmt(residual(nf.f, qi, 1))});
    }
    const auto above = std::count_if(e.begin(), e.end(), [&](double v) { return v > floor; });
    if (above >= 2) {
      const auto s = loglog_slope(q, e, floor);
      rep.check("density_slope_" + nf.name, s ? -*s : NAN, ">", 0.0);
    } else if (above == 1) {
      // Drops from the coarsest density straight to roundoff.
      rep.check("reaches_floor_" + nf.name, e.back(), "<=", floor);
    } else {
      // Resolved exactly from the coarsest density on; nothing to converge.
      rep.check("exact_at_density_" + fmt(q.front()) + "_" + nf.name, e.front(), "<=", floor);
    }
    p.series.push_back({nf.name, q, e});
  }
  const ComplexField one = fs[0].f;
  rep.check("solid_transform_of_one_is_zbar", relative_l2(solid_cauchy(one, density), zbar_field(d)), "<", tol);
  rep.scalars["kind_z_residual_bump"] =
      relative_l2(wirtinger(solve_dbar(fs[3].f, Kind::z, 2, density), Kind::z, 2), fs[3].f);
  rep.tables.push_back(std::move(t));
  rep.plots.push_back(std::move(p));
  return rep;
}

inline Report run_bi_dbar(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const int density = cfg.get_int("dbar.density", default_dbar_density);
  const double tol = cfg.get_double("dbar.tolerance", 1e-3);
  cfg.check_consumed();
  const Domain d = detail::domain_of(res);
  const ComplexField z = z_field(d), zb = zbar_field(d);
  const ComplexField f = zb * zb, g = z * z;
  const BiDbarResult r = solve_bi_dbar2(f, g, density);
  Report rep;
  rep.kind = "bi-dbar";
  rep.summary = "d^2_z w = zbar^2, d^2_zbar w = z^2";
  rep.check("residual_dz2", relative_l2(wirtinger(r.w, Kind::z, 2), f), "<", tol);
  rep.check("residual_dzbar2", relative_l2(wirtinger(r.w, Kind::zbar, 2), g), "<", tol);
  bool rejected = false;
  try {
    solve_bi_dbar2(f, ComplexField(d), density);
  } catch (const IncompatibleDataError&) {
    rejected = true;
  }
  rep.check("incompatible_pair_rejected", rejected ? 1.0 : 0.0, "true", 0.0);
  rep.scalars["compatibility_defect"] = r.compatibility;
  return rep;
}

// ---------------------------------------------------------------------------
// forward-plate

inline double manufactured_plate(double x, double y) { return y * y - x * x - x * x * x * x / 3.0; }

inline Report run_forward_plate(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const double tol = cfg.get_double("plate.tolerance", 1e-4);
  const double solve_tol = cfg.get_double("plate.solve_tolerance", 1e-6);
  cfg.check_consumed();
  // The manufactured solution belongs to mu = 1 + x^2.
  const Domain d = detail::domain_of(res);
  const int nt = d.angular_count();
  const ViscosityField mu = ViscosityField::sample(d, [](double x, double) { return 1.0 + x * x; });
  const RealField ex = RealField::sample(d, manufactured_plate);
  const BoundaryTrace pn = BoundaryTrace::scalar((d.dr() * ex.values()).head(nt));
  const RealField phi = PlateSolver(mu).solve(trace(ex), pn);
  Report rep;
  rep.kind = "forward-plate";
  rep.summary = "manufactured plate solution and boundary jets, mu = 1 + x^2";
  rep.check("plate_solution_error", (phi - ex).max_abs() / ex.max_abs(), "<", solve_tol);

  const BoundaryJet jr = recover_boundary_jets(plate_cauchy_datum(phi, mu), ViscosityJet::of(mu));
  const BoundaryJet js = jet_of(phi);
  Table t{"jets", {"component", "rel_error"}, {}};
  double worst = 0.0;
  for (int c = 0; c < 10; ++c) {
    const double scale = std::max(1.0, js.values.col(c).cwiseAbs().maxCoeff());
    const double e = (jr.values.col(c) - js.values.col(c)).cwiseAbs().maxCoeff() / scale;
    worst = std::max(worst, e);
    t.add({BoundaryJet::names[static_cast<std::size_t>(c)], fmt(e)});
  }
  rep.check("jet_rel_error", worst, "<", tol);
  rep.check("second_order_det_at_n10", second_order_matrix(1.0, 0.0).determinant(), "==", 1.0);
  rep.check("third_order_det_at_n10", third_order_matrix(1.0, 0.0).determinant(), "==", -1.0);
  rep.scalars["jet_consistency"] = jet_consistency(jr);
  rep.tables.push_back(std::move(t));
  return rep;
}

// ---------------------------------------------------------------------------
// nse-scaling

/// Velocity trace of the stream function sin(2x + y) + x y^2 / 2.
inline BoundaryTrace generic_input(int nt) {
  return BoundaryTrace::sample_vector(nt, [](double x, double y) {
    return Vec2{std::cos(2.0 * x + y) + x * y, -2.0 * std::cos(2.0 * x + y) - 0.5 * y * y};
  });
}

inline Report run_nse_scaling(const Config& cfg) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const ViscositySpec mspec = get_viscosity(cfg, "viscosity", {"quadratic"});
  const std::vector<double> exps = cfg.get_list("nse.log10_eps", {-1.0, -1.5, -2.0, -2.5, -3.0});
  const double lo = cfg.get_double("nse.slope_min", 0.8), hi = cfg.get_double("nse.slope_max", 1.2);
  const double trace_tol = cfg.get_double("nse.trace_tolerance", 1e-10);
  const double max_seconds = cfg.get_double("nse.max_seconds", 600.0);
  cfg.check_consumed();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> eps;
  for (double e : exps) eps.push_back(std::pow(10.0, e));
  const Domain d = detail::domain_of(res);
  const LinearizationReport lr = linearization_experiment(mspec.sample(d), generic_input(res.angular), eps);

  Report rep;
  rep.kind = "nse-scaling";
  rep.summary = "rescaled Navier-Stokes Cauchy data against Stokes, " + mspec.tag();
  Table t{"nse_scaling", {"eps", "err_velocity", "err_traction", "err_interior"}, {}};
  std::vector<double> e, a, b, c;
  double worst_trace = 0.0;
  for (const auto& r : lr.rows) {
    t.add({fmt(r.eps), fmt(r.err_velocity), fmt(r.err_traction), fmt(r.err_interior)});
    e.push_back(r.eps);
    a.push_back(r.err_velocity);
    b.push_back(r.err_traction);
    c.push_back(r.err_interior);
    worst_trace = std::max(worst_trace, r.err_velocity);
  }
  // The Dirichlet trace is imposed exactly, so its rescaled error has no
  // eps-dependence to measure; the slope is asserted on the traction and
  // on the interior velocity.
  rep.check("velocity_trace_error", worst_trace, "<=", trace_tol);
  rep.check("slope_traction", lr.slope_traction.value_or(NAN), "range", lo, hi);
  rep.check("slope_interior_velocity", lr.slope_interior.value_or(NAN), "range", lo, hi);
  rep.check("seconds_total", detail::seconds_since(t0), "<", max_seconds).timing = true;
  rep.tables.push_back(std::move(t));
  Plot p = detail::loglog_plot("nse_scaling", "NSE/Stokes Cauchy data", "eps", "error");
  p.series.push_back({"traction", e, b});
  p.series.push_back({"interior velocity", e, c});
  if (lr.slope_traction) p.series.push_back(detail::fitted_line("traction fit", e, b, *lr.slope_traction));
  rep.plots.push_back(std::move(p));
  return rep;
}

// ---------------------------------------------------------------------------
// uniqueness-probe and reconstruct

struct ReconstructSetup {
  Resolution res{12, 48};
  double noise = 0.01;
  std::vector<double> weights;
  int inputs = 8;
};

inline std::vector<double> default_reg_weights() {
  std::vector<double> w;
  for (int e = -8; e <= -1; ++e) w.push_back(std::pow(10.0, e));
  return w;
}

/// Noiseless fit (reg 0) and a noisy L-curve fit for the bump family.
inline void reconstruction_checks(Report& rep, const ViscositySpec& truth, const ReconstructSetup& s,
                                  std::uint64_t seed, double tol_clean, double tol_noisy) {
  if (truth.family != "bump") throw ConfigError("reconstruction needs a bump-family truth viscosity");
  const Domain d = detail::domain_of(s.res);
  const std::vector<BoundaryTrace> inputs = trigonometric_inputs(s.res.angular, s.inputs);
  const ViscosityField mu = truth.sample(d);
  SynthOptions so;
  so.mu_tag = truth.tag();
  const CauchyDataset clean = synth_dataset(mu, inputs, Equation::stokes, so);
  const ReconstructionResult rc = reconstruct_mu(MisfitFunctional(clean, d, bump_family()), 0.0);
  const double c_clean = rc.params[0];
  rep.check("noiseless_rel_error", std::abs(c_clean - truth.c) / std::abs(truth.c), "<=", tol_clean);
  rep.scalars["c_noiseless"] = c_clean;
  rep.scalars["noiseless_iterations"] = rc.iterations;

  so.noise = s.noise;
  so.seed = seed;
  const CauchyDataset noisy = synth_dataset(mu, inputs, Equation::stokes, so);
  const LCurveResult lc = lcurve(MisfitFunctional(noisy, d, bump_family()), s.weights);
  const double c_noisy = lc.points[lc.corner].params[0];
  rep.check("noisy_lcurve_rel_error", std::abs(c_noisy - truth.c) / std::abs(truth.c), "<=", tol_noisy);
  rep.scalars["c_noisy"] = c_noisy;
  rep.scalars["lcurve_weight"] = lc.points[lc.corner].reg_weight;
  Table t{"lcurve", {"reg_weight", "residual", "param_norm", "c"}, {}};
  Plot p = detail::loglog_plot("lcurve", "L-curve", "residual", "|theta|");
  Series sr{"L-curve", {}, {}};
  for (const auto& pt : lc.points) {
    t.add({fmt(pt.reg_weight), fmt(pt.residual), fmt(pt.norm), fmt(pt.params[0])});
    sr.x.push_back(pt.residual);
    sr.y.push_back(pt.norm);
  }
  p.series.push_back(sr);
  rep.tables.push_back(std::move(t));
  rep.plots.push_back(std::move(p));
}

inline ReconstructSetup get_reconstruct_setup(const Config& cfg) {
  ReconstructSetup s;
  s.res = get_resolution(cfg, "reconstruct.resolution", s.res);
  s.noise = cfg.get_double("reconstruct.noise", s.noise);
  s.weights = cfg.get_list("reconstruct.reg_weights", default_reg_weights());
  s.inputs = cfg.get_int("reconstruct.inputs", s.inputs);
  return s;
}

inline Report run_uniqueness_probe(const Config& cfg, std::uint64_t seed) {
  const Resolution res = get_resolution(cfg, "experiment.resolution", {16, 64});
  const Resolution coarse = get_resolution(cfg, "probe.floor_resolution", {12, 48});
  const ViscositySpec m1 = get_viscosity(cfg, "viscosity", {"constant"});
  const ViscositySpec m2 = get_viscosity(cfg, "viscosity2", {"bump"});
  const int ninputs = cfg.get_int("probe.inputs", 8);
  const double ratio = cfg.get_double("probe.floor_ratio", 10.0);
  const bool with_nse = cfg.get_bool("probe.nse", true);
  const double nse_scale = cfg.get_double("probe.nse_scale", 1e-2);
  const bool with_rec = cfg.get_bool("reconstruct.enabled", true);
  const ReconstructSetup rs = get_reconstruct_setup(cfg);
  const double tol_clean = cfg.get_double("reconstruct.tolerance_noiseless", 0.01);
  const double tol_noisy = cfg.get_double("reconstruct.tolerance_noisy", 0.05);
  cfg.check_consumed();

  const Domain d = detail::domain_of(res), dc = detail::domain_of(coarse);
  const auto in = trigonometric_inputs(res.angular, ninputs);
  const auto inc = trigonometric_inputs(coarse.angular, ninputs);
  const ViscosityField mu1 = m1.sample(d), mu2 = m2.sample(d);
  ProbeOptions po;
  po.with_nse = with_nse;
  po.nse_scale = nse_scale;
  const ProbeReport pr = uniqueness_probe(mu1, mu2, in, po);
  const double floor1 = cauchy_gap(synth_dataset(m1.sample(dc), inc, Equation::stokes),
                                   synth_dataset(mu1, in, Equation::stokes));
  const double floor2 = cauchy_gap(synth_dataset(m2.sample(dc), inc, Equation::stokes),
                                   synth_dataset(mu2, in, Equation::stokes));
  const double floor = std::max(floor1, floor2);

  Report rep;
  rep.kind = "uniqueness-probe";
  rep.summary = "Cauchy data of " + m1.tag() + " vs " + m2.tag();
  rep.check("gap_over_refinement_floor", floor > 0.0 ? pr.gap_stokes / floor : INFINITY, ">", ratio);
  rep.scalars["gap_stokes"] = pr.gap_stokes;
  rep.scalars["refinement_floor"] = floor;
  if (pr.gap_nse) rep.scalars["gap_nse"] = *pr.gap_nse;
  rep.scalars["discrepancy"] = pr.discrepancy;
  rep.scalars["mu_distance"] = pr.mu_distance;
  Table t{"probe", {"indicator", "value"}, {}};
  t.add({"gap_stokes", fmt(pr.gap_stokes)});
  if (pr.gap_nse) t.add({"gap_nse", fmt(*pr.gap_nse)});
  t.add({"refinement_floor", fmt(floor)});
  t.add({"discrepancy", fmt(pr.discrepancy)});
  t.add({"mu_distance", fmt(pr.mu_distance)});
  rep.tables.push_back(std::move(t));
  if (with_rec) reconstruction_checks(rep, m2, rs, seed, tol_clean, tol_noisy);
  return rep;
}

inline Report run_reconstruct(const Config& cfg, std::uint64_t seed) {
  ViscositySpec def{"bump"};
  const ViscositySpec truth = get_viscosity(cfg, "viscosity", def);
  const ReconstructSetup rs = get_reconstruct_setup(cfg);
  const double tol_clean = cfg.get_double("reconstruct.tolerance_noiseless", 0.01);
  const double tol_noisy = cfg.get_double("reconstruct.tolerance_noisy", 0.05);
  cfg.check_consumed();
  Report rep;
  rep.kind = "reconstruct";
  rep.summary = "bump-family reconstruction of " + truth.tag();
  reconstruction_checks(rep, truth, rs, seed, tol_clean, tol_noisy);
  return rep;
}

// ---------------------------------------------------------------------------
// Dispatch

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"forward-stokes",   "forward-plate", "equivalence-roundtrip",
                                          "first-order-residual", "nse-scaling", "uniqueness-probe",
                                          "reconstruct",      "dbar-operators", "bi-dbar"};
  return k;
}

/// Runs the experiment named by [experiment] kind (and check, where a kind
/// has several).
inline Report run_experiment(const Config& cfg) {
  const std::string kind = cfg.get_string("experiment.kind", "");
  const std::string check = cfg.get_string("experiment.check", "");
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed", 1));
  cfg.get_string("experiment.criterion", "");
  cfg.get_string("experiment.title", "");
  auto bad_check = [&]() -> Report {
    throw ConfigError("key 'experiment.check': '" + check + "' is not valid for kind '" + kind + "'");
  };
  if (kind == "forward-stokes") {
    if (check.empty() || check == "manufactured") return run_forward_stokes_manufactured(cfg);
    if (check == "rigid-traction") return run_rigid_traction(cfg);
    return bad_check();
  }
  if (kind == "first-order-residual") {
    if (check.empty() || check == "dv") return run_dv_consistency(cfg);
    if (check == "ab-identity") return run_ab_identity(cfg);
    if (check == "discrepancy") return run_discrepancy(cfg);
    return bad_check();
  }
  if (!check.empty()) return bad_check();
  if (kind == "forward-plate") return run_forward_plate(cfg);
  if (kind == "equivalence-roundtrip") return run_equivalence_roundtrip(cfg);
  if (kind == "nse-scaling") return run_nse_scaling(cfg);
  if (kind == "uniqueness-probe") return run_uniqueness_probe(cfg, seed);
  if (kind == "reconstruct") return run_reconstruct(cfg, seed);
  if (kind == "dbar-operators") return run_dbar_operators(cfg);
  if (kind == "bi-dbar") return run_bi_dbar(cfg);
  if (kind.empty()) throw ConfigError("key 'experiment.kind' is required");
  throw ConfigError("key 'experiment.kind': unknown kind '" + kind + "'");
}

}  // namespace vlab
