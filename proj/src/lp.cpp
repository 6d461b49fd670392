#include "mcm/lp.hpp"

#include <vector>

#include "mcm/error.hpp"

namespace mcm {
namespace {

// Sign of the first entry of column j whose magnitude exceeds tol.
int lex_sign(const Eigen::MatrixXd& costs, Eigen::Index j, double tol) {
  for (Eigen::Index k = 0; k < costs.rows(); ++k) {
    const double v = costs(k, j);
    if (v < -tol) return -1;
    if (v > tol) return 1;
  }
  return 0;
}

}  // namespace

LexLpResult solve_lex_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::MatrixXd& objectives, const LexLpOptions& options) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (b.size() != m || objectives.cols() != n) {
    throw Error(ErrorCode::LengthMismatch, "lp: inconsistent dimensions");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b(i) < 0.0) throw Error(ErrorCode::InvalidArgument, "lp: right-hand side must be nonnegative");
  }

  Eigen::MatrixXd tableau = Eigen::MatrixXd::Zero(m, n + m);
  tableau.leftCols(n) = A;
  tableau.rightCols(m).setIdentity();
  Eigen::VectorXd rhs = b;
  Eigen::MatrixXd costs = Eigen::MatrixXd::Zero(objectives.rows(), n + m);
  costs.leftCols(n) = objectives;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  LexLpResult result;
  while (true) {
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (lex_sign(costs, j, options.cost_tol) < 0) {
        entering = j;
        break;
      }
    }
    if (entering < 0) break;

    Eigen::Index leaving = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = tableau(i, entering);
      if (a <= options.pivot_tol) continue;
      const double ratio = rhs(i) / a;
      if (leaving < 0 || ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leaving)])) {
        leaving = i;
        best_ratio = ratio;
      }
    }
    if (leaving < 0) throw Error(ErrorCode::InvalidArgument, "lp: objective is unbounded");
    if (++result.pivots > options.max_pivots) {
      throw Error(ErrorCode::LoopCapExceeded, "lp: pivot limit reached");
    }

    const double pivot = tableau(leaving, entering);
    tableau.row(leaving) /= pivot;
    rhs(leaving) /= pivot;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == leaving) continue;
      const double f = tableau(i, entering);
      if (f == 0.0) continue;
      tableau.row(i) -= f * tableau.row(leaving);
      rhs(i) -= f * rhs(leaving);
      if (rhs(i) < 0.0) rhs(i) = 0.0;  // round-off only; feasibility is maintained exactly in theory
    }
    for (Eigen::Index k = 0; k < costs.rows(); ++k) {
      const double f = costs(k, entering);
      if (f != 0.0) costs.row(k) -= f * tableau.row(leaving);
    }
    basis[static_cast<std::size_t>(leaving)] = entering;
  }

  result.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index var = basis[static_cast<std::size_t>(i)];
    if (var < n) result.x(var) = rhs(i);
  }
  return result;
}

Eigen::VectorXd solve_kappa_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double cap) {
  const Eigen::Index k = A.cols();
  Eigen::MatrixXd full(A.rows() + 1, k);
  full.topRows(A.rows()) = A;
  full.bottomRows(1).setOnes();
  Eigen::VectorXd rhs(A.rows() + 1);
  rhs.head(A.rows()) = b;
  rhs(A.rows()) = cap;

  Eigen::MatrixXd objectives = Eigen::MatrixXd::Zero(k + 1, k);
  objectives.row(0).setConstant(-1.0);
  objectives.bottomRows(k).setIdentity();
  Eigen::VectorXd nu = solve_lex_lp(full, rhs, objectives).x;
  for (Eigen::Index i = 0; i < k; ++i) nu(i) = std::max(nu(i), 0.0);
  return nu;
}

}  // namespace mcm
