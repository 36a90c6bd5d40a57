#pragma once

#include "mixsing/grid.hpp"
#include "mixsing/mixed_operator.hpp"

namespace mixsing {

/// Principal eigenpair of (a_loc + a_frac) e = lambda1 * M e, M = cell_measure * I.
struct EigenPair {
  double lambda1 = 0.0;
  Field e1;               ///< nonnegative, unit discrete L2 norm
  double residual = 0.0;  ///< ||(A - lambda1 M) e1||_2
  int iterations = 0;
  double min_interior = 0.0;
  /// Rayleigh estimate of the next eigenvalue from a deflated run.
  double lambda2_estimate = 0.0;
  /// False when lambda2_estimate <= lambda1 * (1 + 1e-6).
  bool simple = true;
};

struct EigenOptions {
  /// Relative change of successive Rayleigh quotients.
  double tol = 1e-13;
  /// Relative residual ||(A - lambda M) x|| / (lambda ||M x||) also required.
  double residual_tol = 1e-10;
  int max_iter = 500;
  /// Inverse iterations spent on the deflated simplicity probe.
  int probe_iter = 30;
};

/// Inverse power iteration with the cached Cholesky factor of the operator.
/// Throws SolverFailure (carrying the last iterate) without convergence.
EigenPair principal_eigenpair(const MixedOperator& op, const EigenOptions& options = {});

}  // namespace mixsing
