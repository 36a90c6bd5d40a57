#pragma once

#include "mixsing/diagnostics.hpp"
#include "mixsing/eigen_solver.hpp"
#include "mixsing/grid.hpp"
#include "mixsing/mixed_operator.hpp"
#include "mixsing/newton.hpp"
#include "mixsing/problem.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mixsing {

/// I_{lambda,eps}(u); eps = 0 gives the unregularized functional.
double energy(const MixedOperator& op, const ProblemSpec& spec, double eps, const Field& u);

/// A u - M (lambda (u+ + eps)^{-gamma} + (u+)^q). Throws for eps <= 0.
Field gradient(const MixedOperator& op, const ProblemSpec& spec, double eps, const Field& u);

struct GradientCheck {
  int pairs = 0;
  /// max |<gradient(u), d> - central difference| / (1 + |energy(u)|)
  double max_error = 0.0;
};

/// Central-difference oracle for gradient() over seeded pairs (u, d) with u
/// strictly positive, where the gradient is the derivative of the energy.
GradientCheck gradient_check(const MixedOperator& op, const ProblemSpec& spec, double eps, int pairs,
                             std::uint64_t seed);

struct CalibrationOptions {
  double k = 0.5;
  int restarts = 20;
  double ascent_tol = 1e-8;
  int max_ascent_iter = 5000;
  std::uint64_t seed = 2024;
  int max_k_shrinks = 10;
};

/// Mountain-pass geometry of I_{lambda,eps}. Nothing here depends on lambda
/// or eps: T is chosen with I_{0,eps}(T e1) < -1, and I_{0,eps} carries no eps.
struct MountainPassParams {
  double R = 0.0;
  double rho = 0.0;
  double T = 0.0;
  double Lambda_est = 0.0;
  double k = 0.5;
  double theta = 0.0;
  double embedding_C = 0.0;  ///< from max sum (v+)^{q+1}|cell| / ||grad v||^{q+1} = C theta
  double singular_sup_bound = 0.0;  ///< upper bound of sup_{||v||=R} int |v|^{1-gamma} / (1-gamma)
  double lambda1_local = 0.0;
  int k_shrinks = 0;
  Field e1;                  ///< endpoint direction
  Field ascent_maximizer;    ///< h1-normalized maximizer found by the ascent
};

MountainPassParams calibrate_geometry(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec,
                                      const CalibrationOptions& options = {});

struct RimCheck {
  int count = 0;
  int violations = 0;
  double min_energy = 0.0;
};

/// Energies of `count` seeded fields on the sphere h1_semi = R (plus e1 and
/// the ascent maximizer) against rho, at the given lambda.
RimCheck rim_check(const MixedOperator& op, const ProblemSpec& spec, double eps, const MountainPassParams& params,
                   double lambda, int count, std::uint64_t seed);

struct BallOptions {
  /// Projected-gradient norm (h1 metric) at which descent stops.
  double tol = 1e-7;
  int max_iter = 20000;
  NewtonOptions newton;
};

struct BallResult {
  Field nu;
  double energy = 0.0;
  double h1 = 0.0;
  double gradient_norm = 0.0;  ///< ||F||_2 after the Newton polish
  int iterations = 0;
  int newton_iterations = 0;
};

/// Projected gradient descent of I_{lambda,eps} on {h1_semi <= R}, then
/// unconstrained Newton polish. Throws if the minimizer sits on the rim.
BallResult ball_minimizer(const MixedOperator& op, const ProblemSpec& spec, double eps,
                          const MountainPassParams& params, const BallOptions& options = {},
                          const Field* warm_start = nullptr);

struct MountainPassOptions {
  int n_path = 41;
  /// Gradient norm (h1 dual) at the highest path node before the Newton polish.
  double tol = 1e-4;
  int max_sweeps = 20000;
  int redistribute_every = 10;
  NewtonOptions newton;
};

struct MountainPassResult {
  Field zeta;
  double energy = 0.0;
  double path_max = 0.0;       ///< highest energy along the final path
  double path_gradient = 0.0;  ///< gradient norm at the highest node
  double gradient_norm = 0.0;  ///< ||F||_2 after the Newton polish
  int sweeps = 0;
  int newton_iterations = 0;
  std::vector<Field> path;
};

/// Path-deformation mountain pass between 0 and T e1, Newton polish at the top.
MountainPassResult mountain_pass(const MixedOperator& op, const ProblemSpec& spec, double eps,
                                 const MountainPassParams& params, const MountainPassOptions& options = {},
                                 const std::vector<Field>* warm_path = nullptr);

struct EpsTraceEntry {
  double eps = 0.0;
  double energy_nu = 0.0;    ///< I_{lambda,eps}(nu_eps)
  double energy_zeta = 0.0;  ///< I_{lambda,eps}(zeta_eps)
  double residual_nu = 0.0;
  double residual_zeta = 0.0;
  double h1_nu = 0.0;
  double h1_zeta = 0.0;
  double change_nu = 0.0;  ///< h1 change from the previous eps
  double change_zeta = 0.0;
  double barrier_margin = 0.0;  ///< min over both branches of min_i (v_i - xi_i)
  int mp_sweeps = 0;
};

struct G2Options {
  EpsSchedule schedule;
  /// Both branches must change by less than this (h1) between consecutive eps.
  double cauchy_tol = 1e-6;
  CalibrationOptions calibration;
  BallOptions ball;
  MountainPassOptions mountain;
  NewtonOptions newton;
  int n_test_fields = 20;
  std::uint64_t seed = 12345;
  /// Refuse lambda >= Lambda_est. Disabled by the empirical lambda sweep.
  bool enforce_lambda_bound = true;
};

/// Two positive solutions of -Lap u + (-Lap)^s u = lambda u^{-gamma} + u^q.
struct TwoSolutions {
  Field nu;
  Field zeta;
  double energy_nu = 0.0;    ///< I_lambda(nu_0)
  double energy_zeta = 0.0;  ///< I_lambda(zeta_0)
  std::vector<EpsTraceEntry> eps_trace;
  Field barrier;
  double barrier_min = 0.0;
  double barrier_constant = 0.0;  ///< min{1, lambda/2}
  MountainPassParams params;
  double Theta = 0.0;  ///< max h1 seminorm seen along the schedule
  ResidualReport residual_nu;
  ResidualReport residual_zeta;
  double newton_residual_nu = 0.0;
  double newton_residual_zeta = 0.0;
  double distinctness = 0.0;        ///< linf(nu - zeta)
  double distinctness_ratio = 0.0;  ///< linf(nu - zeta) / linf(zeta)
  /// |I_{lambda,eps}(v_eps) - I_lambda(v_0)| along the trace, per branch.
  std::vector<double> limit_gap_nu;
  std::vector<double> limit_gap_zeta;
};

TwoSolutions solve_g2(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec,
                      const G2Options& options = {});
/// Same with geometry computed beforehand.
TwoSolutions solve_g2(const MixedOperator& op, const ProblemSpec& spec, const MountainPassParams& params,
                      const G2Options& options = {});

}  // namespace mixsing
