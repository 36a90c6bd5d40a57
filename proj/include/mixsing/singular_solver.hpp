#pragma once

#include "mixsing/eigen_solver.hpp"
#include "mixsing/grid.hpp"
#include "mixsing/mixed_operator.hpp"
#include "mixsing/newton.hpp"
#include "mixsing/problem.hpp"

#include <cstdint>
#include <vector>

namespace mixsing {

struct ContinuationStep {
  double eps = 0.0;
  double h1_change = 0.0;  ///< h1 seminorm of the change from the previous eps
  double linf = 0.0;
  double residual = 0.0;
  int newton_iterations = 0;
};

struct PureSingularOptions {
  EpsSchedule schedule;
  /// Continuation stops once successive iterates differ by less than this in h1 seminorm.
  double tol = 1e-6;
  NewtonOptions newton;
  /// Finish with a Newton solve of the unregularized problem from the last iterate.
  bool polish_unregularized = true;
};

/// Solution v0 of -Lap v + (-Lap)^s v = v^{-gamma}, v > 0.
struct PureSingularResult {
  Field v0;
  std::vector<ContinuationStep> trace;
  double linf = 0.0;
  double min_interior = 0.0;
  double residual = 0.0;  ///< ||F(v0)||_2 of the final (possibly unregularized) system
  /// Largest decrease of any node between consecutive eps (>= 0 up to roundoff).
  double max_monotonicity_violation = 0.0;
};

/// eps-continuation on g_eps(t) = (t+ + eps)^{-gamma} with warm starts.
/// Throws SolverFailure on stagnation, loss of positivity or of ordering in eps.
PureSingularResult solve_pure_singular(const MixedOperator& op, double gamma, const PureSingularOptions& options = {});

/// Largest a from 1, 1/2, 1/4, ... with lambda1 a e1_i <= lambda (a e1_i)^{-gamma} h(a e1_i) for all nodes.
double find_a_lambda(const EigenPair& eig, const ProblemSpec& spec);

/// First b from 1, 2, 4, ... meeting the scalar supersolution inequality and
/// the nodewise check (A b v0)_i >= M lambda (b v0_i)^{-gamma} h(b v0_i).
double find_b_lambda(const MixedOperator& op, const Field& v0, const ProblemSpec& spec);

struct SandwichOptions {
  /// Stop when h1_semi(u^{k+1} - u^k) < tol.
  double tol = 1e-12;
  int max_iter = 20000;
  /// Points used to sample the Lipschitz bound of g over each node's interval.
  int lipschitz_samples = 1000;
  /// Per-node shift sigma_i from each node's own interval [sub_i, sup_i];
  /// otherwise one global sigma over [min sub, max sup].
  bool nodal_shift = true;
  /// Newton polish from the monotone limit, kept only if it stays sandwiched.
  bool polish = true;
  int n_test_fields = 20;
  std::uint64_t seed = 12345;
  PureSingularOptions pure;
};

/// Sub/supersolution pair and the solution between them.
struct SandwichCertificate {
  Field sub;
  Field sup;
  double a_lambda = 0.0;
  double b_lambda = 0.0;
  Field solution;
  double residual = 0.0;         ///< max weak residual over the seeded test fields
  double newton_residual = 0.0;  ///< ||F(u)||_2
  int iterations = 0;            ///< monotone iterations
  int polish_iterations = 0;
  bool polished = false;
  double shift_max = 0.0;        ///< largest nodal shift sigma used
  bool shift_retried = false;
  double min_interior = 0.0;
  double linf = 0.0;
  double energy = 0.0;           ///< J_lambda(u)
  double ordering_defect = 0.0;  ///< max violation of sub <= u <= sup (>= 0)
  PureSingularResult pure;
};

/// Monotone (shifted Picard) iteration from the subsolution a_lambda e1.
SandwichCertificate solve_g1(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec,
                             const SandwichOptions& options = {});
/// Same, reusing a previously computed pure-singular solution.
SandwichCertificate solve_g1(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec,
                             const PureSingularResult& pure, const SandwichOptions& options = {});

/// J_lambda(u) = 1/2 B(u,u) - lambda sum_i H(u_i) |cell|, H(t) = int_0^t h(r) r^{-gamma} dr.
double g1_energy(const MixedOperator& op, const ProblemSpec& spec, const Field& u);

/// int_0^t h(r) r^{-gamma} dr by Gauss-Legendre after r = v^{1/(1-gamma)}.
double h_primitive(const HFunction& h, double gamma, double t);

}  // namespace mixsing
