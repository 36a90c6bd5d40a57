#pragma once

#include "mixsing/grid.hpp"
#include "mixsing/mixed_operator.hpp"
#include "mixsing/problem.hpp"

#include <vector>

namespace mixsing {

struct NewtonOptions {
  double tol = 1e-11;
  int max_iter = 100;
  /// Reject trial points with any nonpositive entry (needed when g is only
  /// defined for t > 0).
  bool require_positive = false;
  /// Sufficient decrease constant for the backtracking search on ||F||_2.
  double armijo = 1e-4;
  int max_backtracks = 50;
};

struct NewtonResult {
  Field u;
  double residual = 0.0;          ///< ||F(u)||_2
  double initial_residual = 0.0;  ///< ||F(u0)||_2
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Residual F(u) = (a_loc + a_frac) u - M g(u).
Eigen::VectorXd nonlinear_residual(const MixedOperator& op, const ScalarRhs& g, const Eigen::VectorXd& u);

/// Damped Newton with backtracking on ||F||_2. Converged when
/// ||F(u)||_2 < tol * (1 + ||F(u0)||_2). Throws SolverFailure carrying the
/// last iterate on line-search failure or iteration exhaustion.
NewtonResult solve_regularized(const MixedOperator& op, const ScalarRhs& g, const Field& u0,
                               const NewtonOptions& options = {});

}  // namespace mixsing
