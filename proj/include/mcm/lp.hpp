#pragma once

#include <Eigen/Dense>

namespace mcm {

/// Dense primal simplex for   lex-min (C x)   s.t.  A x <= b,  x >= 0,  b >= 0.
///
/// Row k of `objectives` is the k-th priority objective; later rows only
/// break ties among optima of earlier rows. Pivoting follows Bland's rule, so
/// the result is a deterministic function of the inputs. The origin is always
/// feasible because b >= 0, so no phase-one is needed.
struct LexLpResult {
  Eigen::VectorXd x;
  int pivots = 0;
};

struct LexLpOptions {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-12;
  int max_pivots = 100000;
};

LexLpResult solve_lex_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::MatrixXd& objectives, const LexLpOptions& options = {});

/// max sum(nu)  s.t.  A nu <= b,  nu >= 0,  sum(nu) <= cap,
/// with ties broken toward the lexicographically smallest nu.
/// This is the kappa linear program in both its exact and empirical forms.
Eigen::VectorXd solve_kappa_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double cap = 1.0);

}  // namespace mcm
