#pragma once

// Synthetic identifiability experiments: Cauchy datasets (Dirichlet input,
// traction output) for a viscosity, their distance, a parametric viscosity
// reconstruction and the combined uniqueness probe.

#include "vlab/domain.hpp"
#include "vlab/errors.hpp"
#include "vlab/first_order.hpp"
#include "vlab/flow.hpp"

#include <Eigen/Dense>

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace vlab {

enum class Equation { stokes, nse };

inline const char* to_string(Equation e) { return e == Equation::stokes ? "stokes" : "nse"; }

struct CauchyDataset {
  std::string mu_tag;
  Equation equation = Equation::stokes;
  double noise = 0.0;
  int radial = 0, angular = 0;
  std::vector<StokesCauchyDatum> data;
  std::vector<std::string> failures;  // empty string when the datum solved
};

/// Removes the net flux from a velocity trace by subtracting a multiple of n.
inline BoundaryTrace flux_project(BoundaryTrace g) {
  const double q = check_flux(g) / (2.0 * pi);
  const FrameTrace f = boundary_frame(static_cast<int>(g.size()));
  g.values() -= q * f.normal;
  return g;
}

/// The trigonometric input family: for m = 1, 2, ... the traces (cos m t, 0),
/// (0, cos m t), (sin m t, 0), (0, sin m t), flux-projected; first `count`.
inline std::vector<BoundaryTrace> trigonometric_inputs(int n, int count = 8) {
  std::vector<BoundaryTrace> out;
  for (int m = 1; static_cast<int>(out.size()) < count; ++m) {
    for (int c = 0; c < 4 && static_cast<int>(out.size()) < count; ++c) {
      Eigen::VectorXd a(n), b(n);
      for (int k = 0; k < n; ++k) {
        const double t = 2.0 * pi * k / n;
        const double v = c < 2 ? std::cos(m * t) : std::sin(m * t);
        a[k] = c % 2 == 0 ? v : 0.0;
        b[k] = c % 2 == 0 ? 0.0 : v;
      }
      out.push_back(flux_project(BoundaryTrace::vector(a, b)));
    }
  }
  return out;
}

inline double rms(const Eigen::MatrixXd& v) {
  return v.size() ? std::sqrt(v.squaredNorm() / static_cast<double>(v.size())) : 0.0;
}

/// Adds Gaussian noise whose RMS is exactly `level` times the RMS of t.
inline void perturb(BoundaryTrace& t, double level, std::mt19937_64& rng) {
  if (level <= 0.0) return;
  std::normal_distribution<double> normal;
  Eigen::MatrixXd e(t.values().rows(), t.values().cols());
  for (Index i = 0; i < e.size(); ++i) e.data()[i] = normal(rng);
  const double scale = rms(e);
  if (scale > 0.0) t.values() += (level * rms(t.values()) / scale) * e;
}

struct SynthOptions {
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string mu_tag = "custom";
  NseOptions nse{};
};

inline CauchyDataset synth_dataset(const ViscosityField& mu, const std::vector<BoundaryTrace>& inputs,
                                   Equation eq, const SynthOptions& opt = {}) {
  const Domain& d = mu.domain();
  CauchyDataset ds{opt.mu_tag, eq, opt.noise, d.radial_count(), d.angular_count(), {}, {}};
  const StokesSolver solver(mu);
  std::mt19937_64 rng(opt.seed);
  for (const BoundaryTrace& g : inputs) {
    StokesCauchyDatum datum{g, BoundaryTrace()};
    std::string failure;
    try {
      const FlowState s = eq == Equation::stokes ? solver.solve(g) : solve_nse(solver, g, opt.nse).state;
      datum.traction = traction(s, mu);
      perturb(datum.traction, opt.noise, rng);
    } catch (const Error& e) {
      failure = e.what();
    }
    ds.data.push_back(std::move(datum));
    ds.failures.push_back(std::move(failure));
  }
  return ds;
}

/// Trace resampled to n nodes by trigonometric interpolation.
inline BoundaryTrace resample(const BoundaryTrace& t, int n) {
  if (t.size() == n) return t;
  Eigen::MatrixXd out(n, t.dim());
  for (Index c = 0; c < t.dim(); ++c) {
    out.col(c) = spectral::resample_periodic(Eigen::VectorXcd(t.values().col(c).cast<cplx>()), n).real();
  }
  return t.dim() == 1 ? BoundaryTrace::scalar(out.col(0)) : BoundaryTrace::vector(out.col(0), out.col(1));
}

/// Boundary L2 norm of a traction difference after removing its best
/// multiple of the normal (the pressure constant is not data).
inline double l2_modulo_pressure(const Eigen::MatrixXd& dt) {
  const auto n = static_cast<int>(dt.rows());
  const FrameTrace f = boundary_frame(n);
  const double c = (dt.array() * f.normal.array()).sum() / f.normal.squaredNorm();
  return std::sqrt((dt - c * f.normal).squaredNorm() * 2.0 * pi / n);
}

/// Max over inputs of the relative L2 traction distance, modulo the pressure
/// constant. Datasets on different grids are compared on the finer boundary.
inline double cauchy_gap(const CauchyDataset& a, const CauchyDataset& b, double input_tol = 1e-8) {
  if (a.data.size() != b.data.size()) throw IncompatibleDataError("datasets have different input counts");
  const int n = std::max(a.angular, b.angular);
  double gap = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (!a.failures[i].empty() || !b.failures[i].empty()) {
      throw SolverError("datum " + std::to_string(i) + " has no traction");
    }
    const BoundaryTrace ga = resample(a.data[i].velocity, n), gb = resample(b.data[i].velocity, n);
    const double gscale = std::max(rms(ga.values()), rms(gb.values()));
    if (rms(ga.values() - gb.values()) > input_tol * std::max(gscale, 1.0)) {
      throw IncompatibleDataError("datasets use different boundary inputs (datum " +
                                  std::to_string(i) + ")");
    }
    const BoundaryTrace ta = resample(a.data[i].traction, n), tb = resample(b.data[i].traction, n);
    const double den = std::max(boundary_l2(ta), boundary_l2(tb));
    const double num = l2_modulo_pressure(ta.values() - tb.values());
    gap = std::max(gap, den > 0.0 ? num / den : num);
  }
  return gap;
}

// ---------------------------------------------------------------------------
// Dataset files: manifest.json plus datum_<i>.csv with columns
// node,theta,g1,g2,T1,T2 (traction columns empty for a failed datum).

inline constexpr const char* dataset_schema = "vlab-dataset/1";

inline void save_dataset(const CauchyDataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create dataset directory '" + dir.string() + "'");
  nlohmann::ordered_json m;
  m["schema"] = dataset_schema;
  m["radial"] = ds.radial;
  m["angular"] = ds.angular;
  m["mu_tag"] = ds.mu_tag;
  m["equation"] = to_string(ds.equation);
  m["noise"] = ds.noise;
  m["count"] = ds.data.size();
  m["failures"] = ds.failures;
  std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
  char buf[64];
  for (std::size_t i = 0; i < ds.data.size(); ++i) {
    std::ofstream out(dir / ("datum_" + std::to_string(i) + ".csv"));
    if (!out) throw Error("cannot write dataset file in '" + dir.string() + "'");
    out << "node,theta,g1,g2,T1,T2\n";
    const auto& g = ds.data[i].velocity.values();
    const bool ok = ds.failures[i].empty();
    for (Index k = 0; k < g.rows(); ++k) {
      out << k;
      std::snprintf(buf, sizeof buf, ",%.17g", 2.0 * pi * static_cast<double>(k) / static_cast<double>(g.rows()));
      out << buf;
      for (Index c = 0; c < 2; ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", g(k, c));
        out << buf;
      }
      for (Index c = 0; c < 2; ++c) {
        if (ok) {
          std::snprintf(buf, sizeof buf, ",%.17g", ds.data[i].traction.values()(k, c));
          out << buf;
        } else {
          out << ",";
        }
      }
      out << "\n";
    }
  }
}

inline CauchyDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("no dataset manifest in '" + dir.string() + "'");
  CauchyDataset ds;
  std::size_t count = 0;
  try {
    const auto m = nlohmann::json::parse(in);
    if (m.at("schema") != dataset_schema) throw ConfigError("unknown dataset schema");
    ds.radial = m.at("radial");
    ds.angular = m.at("angular");
    ds.mu_tag = m.at("mu_tag");
    const std::string eq = m.at("equation");
    if (eq != "stokes" && eq != "nse") throw ConfigError("unknown equation tag '" + eq + "'");
    ds.equation = eq == "stokes" ? Equation::stokes : Equation::nse;
    ds.noise = m.at("noise");
    count = m.at("count");
    ds.failures = m.at("failures").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad dataset manifest: " + std::string(e.what()));
  }
  if (ds.failures.size() != count) throw ConfigError("dataset manifest failure list has the wrong length");
  for (std::size_t i = 0; i < count; ++i) {
    std::ifstream f(dir / ("datum_" + std::to_string(i) + ".csv"));
    if (!f) throw ConfigError("missing datum file " + std::to_string(i));
    std::string line;
    std::getline(f, line);
    std::vector<std::array<double, 4>> rows;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      while (cells.size() < 6) cells.emplace_back();
      std::array<double, 4> r{};
      for (int c = 0; c < 4; ++c) {
        const std::string& t = cells[2 + c];
        try {
          r[c] = t.empty() ? NAN : std::stod(t);
        } catch (const std::exception&) {
          throw ConfigError("datum " + std::to_string(i) + ": bad number '" + t + "'");
        }
      }
      rows.push_back(r);
    }
    if (static_cast<int>(rows.size()) != ds.angular) throw ConfigError("datum " + std::to_string(i) + " has the wrong node count");
    Eigen::VectorXd g1(ds.angular), g2(ds.angular), t1(ds.angular), t2(ds.angular);
    for (int k = 0; k < ds.angular; ++k) {
      g1[k] = rows[k][0];
      g2[k] = rows[k][1];
      t1[k] = rows[k][2];
      t2[k] = rows[k][3];
    }
    StokesCauchyDatum d{BoundaryTrace::vector(g1, g2), BoundaryTrace()};
    if (ds.failures[i].empty()) d.traction = BoundaryTrace::vector(t1, t2);
    ds.data.push_back(std::move(d));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Parametric reconstruction

/// mu(theta) = base + sum_i theta_i b_i, with every b_i vanishing to first
/// order on the circle.
struct Parametrization {
  std::function<double(double, double)> base = [](double, double) { return 1.0; };
  std::vector<std::function<double(double, double)>> basis;

  ViscosityField viscosity(const Domain& d, const Eigen::VectorXd& theta) const {
    return ViscosityField::sample(d, [&](double x, double y) {
      double v = base(x, y);
      for (std::size_t i = 0; i < basis.size(); ++i) v += theta[static_cast<Index>(i)] * basis[i](x, y);
      return v;
    });
  }
};

/// The one-parameter bump family 1 + c (1 - |z|^2)^2.
inline Parametrization bump_family() {
  Parametrization p;
  p.basis.push_back([](double x, double y) {
    const double s = 1.0 - x * x - y * y;
    return s * s;
  });
  return p;
}

struct ReconstructOptions {
  Eigen::VectorXd initial;  // zero when empty
  int max_iter = 40;
  double grad_tol = 1e-10;
  double step_tol = 1e-9;
  double fd_step = 1e-5;
};

struct ReconstructionResult {
  Eigen::VectorXd params;
  std::vector<double> history;  // objective after each accepted step
  double misfit = 0.0;          // relative data misfit at the estimate
  double objective = 0.0;
  std::optional<ViscosityField> mu;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

/// Relative squared traction misfit summed over the dataset.
class MisfitFunctional {
 public:
  MisfitFunctional(const CauchyDataset& data, const Domain& d, Parametrization p)
      : data_(data), domain_(d), param_(std::move(p)) {
    if (data.angular != d.angular_count()) {
      for (auto& datum : data_.data) {
        datum.velocity = resample(datum.velocity, d.angular_count());
        datum.traction = resample(datum.traction, d.angular_count());
      }
    }
    for (std::size_t i = 0; i < data_.data.size(); ++i) {
      if (!data_.failures[i].empty()) throw SolverError("dataset contains failed data");
      norm2_ += std::pow(boundary_l2(data_.data[i].traction), 2);
    }
    if (norm2_ == 0.0) norm2_ = 1.0;
  }

  /// Empty when theta leaves the admissible (positive) region.
  std::optional<double> misfit(const Eigen::VectorXd& theta) const {
    std::optional<ViscosityField> mu;
    try {
      mu.emplace(param_.viscosity(domain_, theta));
    } catch (const ConfigError&) {
      return std::nullopt;
    }
    const StokesSolver solver(*mu);
    double acc = 0.0;
    for (const auto& datum : data_.data) {
      const FlowState s = data_.equation == Equation::stokes ? solver.solve(datum.velocity)
                                                              : solve_nse(solver, datum.velocity).state;
      const BoundaryTrace t = traction(s, *mu);
      acc += std::pow(l2_modulo_pressure(t.values() - datum.traction.values()), 2);
    }
    return acc / norm2_;
  }

  const Parametrization& parametrization() const { return param_; }
  const Domain& domain() const { return domain_; }
  Index size() const { return static_cast<Index>(param_.basis.size()); }

 private:
  CauchyDataset data_;
  Domain domain_;
  Parametrization param_;
  double norm2_ = 0.0;
};

/// BFGS on misfit + reg_weight |theta|^2 with central finite-difference
/// gradients and Armijo backtracking; steps into non-positive viscosities
/// are backtracked.
inline ReconstructionResult reconstruct_mu(const MisfitFunctional& j, double reg_weight,
                                           const ReconstructOptions& opt = {}) {
  const Index n = j.size();
  if (n == 0) throw ConfigError("parametrization has no basis functions");
  auto objective = [&](const Eigen::VectorXd& th) -> std::optional<double> {
    const auto m = j.misfit(th);
    if (!m) return std::nullopt;
    return *m + reg_weight * th.squaredNorm();
  };
  auto gradient = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd g(n);
    for (Index i = 0; i < n; ++i) {
      Eigen::VectorXd a = th, b = th;
      a[i] += opt.fd_step;
      b[i] -= opt.fd_step;
      const auto fa = objective(a), fb = objective(b);
      if (!fa || !fb) throw SolverError("finite-difference probe left the admissible region");
      g[i] = (*fa - *fb) / (2.0 * opt.fd_step);
    }
    return g;
  };

  ReconstructionResult res;
  Eigen::VectorXd x = opt.initial.size() == n ? opt.initial : Eigen::VectorXd::Zero(n);
  auto f0 = objective(x);
  if (!f0) throw ConfigError("initial parameters give a non-positive viscosity");
  double f = *f0;
  res.history.push_back(f);
  Eigen::VectorXd g = gradient(x);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool first = true;
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    if (g.norm() < opt.grad_tol) {
      res.converged = true;
      res.message = "gradient below tolerance";
      break;
    }
    Eigen::VectorXd p = -h * g;
    if (p.dot(g) >= 0.0) {
      h.setIdentity();
      p = -g;
    }
    if (first) {
      // Unit scaling of the first step is arbitrary; aim at the quadratic model.
      const double curv = g.squaredNorm() > 0 ? 2.0 * f / g.squaredNorm() : 1.0;
      p *= std::min(1.0, curv);
      first = false;
    }
    double step = 1.0;
    std::optional<double> fn;
    Eigen::VectorXd xn;
    for (int ls = 0; ls < 40; ++ls) {
      xn = x + step * p;
      fn = objective(xn);
      if (fn && *fn <= f + 1e-4 * step * g.dot(p)) break;
      fn.reset();
      step *= 0.5;
    }
    if (!fn) {
      res.converged = (step * p).norm() < opt.step_tol * (1.0 + x.norm()) || g.norm() < 1e-6;
      res.message = "line search failed";
      break;
    }
    const Eigen::VectorXd gn = gradient(xn);
    const Eigen::VectorXd s = xn - x, y = gn - g;
    x = xn;
    f = *fn;
    g = gn;
    res.history.push_back(f);
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(n, n);
      const double rho = 1.0 / sy;
      h = (i - rho * s * y.transpose()) * h * (i - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (s.norm() < opt.step_tol * (1.0 + x.norm())) {
      res.converged = true;
      res.message = "step below tolerance";
      break;
    }
  }
  if (!res.converged && res.message.empty()) res.message = "iteration cap reached";
  res.params = x;
  res.objective = f;
  res.misfit = *j.misfit(x);
  res.mu.emplace(j.parametrization().viscosity(j.domain(), x));
  return res;
}

struct LCurvePoint {
  double reg_weight = 0.0;
  double residual = 0.0;  // sqrt(misfit)
  double norm = 0.0;      // |theta|
  Eigen::VectorXd params;
};

struct LCurveResult {
  std::vector<LCurvePoint> points;
  std::size_t corner = 0;
};

/// Index of the maximum-curvature point of the curve (log residual, log norm).
inline std::size_t lcurve_corner(const std::vector<LCurvePoint>& pts) {
  if (pts.size() < 3) return 0;
  std::vector<double> a, b;
  for (const auto& p : pts) {
    a.push_back(std::log(std::max(p.residual, 1e-300)));
    b.push_back(std::log(std::max(p.norm, 1e-300)));
  }
  std::size_t best = 1;
  double kmax = -1.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    // Curvature of the circle through three consecutive points.
    const double ax = a[i] - a[i - 1], ay = b[i] - b[i - 1];
    const double bx = a[i + 1] - a[i], by = b[i + 1] - b[i];
    const double cx = a[i + 1] - a[i - 1], cy = b[i + 1] - b[i - 1];
    const double la = std::hypot(ax, ay), lb = std::hypot(bx, by), lc = std::hypot(cx, cy);
    if (la * lb * lc == 0.0) continue;
    const double k = 2.0 * std::abs(ax * by - ay * bx) / (la * lb * lc);
    if (k > kmax) {
      kmax = k;
      best = i;
    }
  }
  return best;
}

inline LCurveResult lcurve(const MisfitFunctional& j, const std::vector<double>& weights,
                           const ReconstructOptions& opt = {}) {
  LCurveResult out;
  ReconstructOptions o = opt;
  for (double w : weights) {
    const ReconstructionResult r = reconstruct_mu(j, w, o);
    o.initial = r.params;  // warm start along the sweep
    out.points.push_back({w, std::sqrt(r.misfit), r.params.norm(), r.params});
  }
  out.corner = lcurve_corner(out.points);
  return out;
}

// ---------------------------------------------------------------------------
// Uniqueness probe

struct ProbeOptions {
  double jet_tol = 1e-6;
  bool with_nse = false;
  double nse_scale = 1e-2;
};

struct ProbeReport {
  double gap_stokes = 0.0;
  std::optional<double> gap_nse;
  double discrepancy = 0.0;  // max |(alpha1^2 - alpha2^2)/2| from the transport identity
  double mu_distance = 0.0;  // max |mu1 - mu2|
};

/// Max deviation of boundary values and gradients of two viscosities.
inline double jet_mismatch(const ViscosityField& a, const ViscosityField& b) {
  const double v = (a.boundary_value().values() - b.boundary_value().values()).cwiseAbs().maxCoeff();
  const double g =
      (a.boundary_gradient().values() - b.boundary_gradient().values()).cwiseAbs().maxCoeff();
  return std::max(v, g);
}

inline ProbeReport uniqueness_probe(const ViscosityField& mu1, const ViscosityField& mu2,
                                    const std::vector<BoundaryTrace>& inputs,
                                    const ProbeOptions& opt = {}) {
  if (!mu1.domain().same_grid(mu2.domain())) throw ConfigError("viscosities live on different grids");
  const double jm = jet_mismatch(mu1, mu2);
  const double scale = std::max(mu1.field().max_abs(), 1.0);
  if (jm > opt.jet_tol * scale) {
    throw IncompatibleDataError("viscosities have different boundary jets (mismatch " +
                                std::to_string(jm) + ")");
  }
  ProbeReport rep;
  rep.gap_stokes = cauchy_gap(synth_dataset(mu1, inputs, Equation::stokes),
                              synth_dataset(mu2, inputs, Equation::stokes));
  if (opt.with_nse) {
    std::vector<BoundaryTrace> small = inputs;
    for (auto& g : small) g.values() *= opt.nse_scale;
    rep.gap_nse = cauchy_gap(synth_dataset(mu1, small, Equation::nse),
                             synth_dataset(mu2, small, Equation::nse));
  }
  rep.discrepancy = interior_max(transport_factor(alpha_beta(mu1), alpha_beta(mu2)).discrepancy);
  rep.mu_distance = (mu1.field() - mu2.field()).max_abs();
  return rep;
}

}  // namespace vlab
