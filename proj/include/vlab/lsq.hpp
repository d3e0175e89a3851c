#pragma once

// Equality-constrained least squares, min ||A x - b|| subject to C x = d,
// by the null-space method. Factorizations are kept so one operator can be
// solved against many right-hand sides.

#include "vlab/errors.hpp"

#include <Eigen/Dense>

#include <string>

namespace vlab {

class ConstrainedLeastSquares {
 public:
  ConstrainedLeastSquares() = default;

  /// C must have full row rank and A Q2 full column rank, where Q2 spans
  /// null(C); otherwise SolverError reports the offending estimate.
  ConstrainedLeastSquares(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                          double min_rcond = 1e-14) {
    if (a.cols() != c.cols()) throw ConfigError("constraint and operator column counts differ");
    const Eigen::Index n = a.cols(), m = c.rows();
    if (m > n) throw ConfigError("more constraints than unknowns");
    Eigen::HouseholderQR<Eigen::MatrixXd> qc(c.transpose());
    const Eigen::MatrixXd q = qc.householderQ();
    r_ = qc.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    q1_ = q.leftCols(m);
    q2_ = q.rightCols(n - m);
    check_triangle(r_, min_rcond, "constraint");
    aq2_ = a * q2_;
    a_ = a;
    qa_.compute(aq2_);
    check_triangle(qa_.matrixQR().topRows(n - m).triangularView<Eigen::Upper>(), min_rcond,
                   "reduced operator");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b, const Eigen::VectorXd& d) const {
    const Eigen::VectorXd x0 = q1_ * r_.transpose().triangularView<Eigen::Lower>().solve(d);
    const Eigen::VectorXd rhs = b - a_ * x0;
    const Eigen::VectorXd y = qa_.solve(rhs);
    return x0 + q2_ * y;
  }

 private:
  static void check_triangle(const Eigen::MatrixXd& r, double min_rcond, const char* what) {
    const Eigen::VectorXd diag = r.diagonal().cwiseAbs();
    if (diag.size() == 0) return;
    const double ratio = diag.minCoeff() / diag.maxCoeff();
    if (!(ratio > min_rcond)) {
      throw SolverError(std::string(what) + " matrix is rank deficient (pivot ratio " +
                        std::to_string(ratio) + ")");
    }
  }

  Eigen::MatrixXd a_, q1_, q2_, r_, aq2_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qa_;
};

}  // namespace vlab
