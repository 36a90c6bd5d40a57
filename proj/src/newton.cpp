#include "mixsing/newton.hpp"

#include "mixsing/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>

namespace mixsing {

Eigen::VectorXd nonlinear_residual(const MixedOperator& op, const ScalarRhs& g, const Eigen::VectorXd& u)
{
  Eigen::VectorXd r = op.system() * u;
  const double m = op.mass();
  for (Eigen::Index i = 0; i < u.size(); ++i) r[i] -= m * g.value(u[i]);
  return r;
}

namespace {

double residual_norm(const MixedOperator& op, const ScalarRhs& g, const Eigen::VectorXd& u, bool require_positive)
{
  if (require_positive && !(u.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
  const double r = nonlinear_residual(op, g, u).norm();
  return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd newton_direction(const MixedOperator& op, const ScalarRhs& g, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& residual)
{
  Eigen::MatrixXd jac = op.system();
  const double m = op.mass();
  bool spd_candidate = true;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double dg = g.derivative(u[i]);
    jac(i, i) -= m * dg;
    if (dg > 0.0) spd_candidate = false;
  }
  if (spd_candidate) {
    Eigen::LLT<Eigen::MatrixXd> llt(jac);
    if (llt.info() == Eigen::Success) return llt.solve(-residual);
  }
  return Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-residual);
}

}  // namespace

NewtonResult solve_regularized(const MixedOperator& op, const ScalarRhs& g, const Field& u0,
                               const NewtonOptions& options)
{
  require_same_domain(op.domain(), u0.domain, "solve_regularized");
  if (!(options.tol > 0.0)) throw InvalidArgument("solve_regularized: tol must be positive");

  Eigen::VectorXd u = u0.values;
  Eigen::VectorXd f = nonlinear_residual(op, g, u);
  double norm = f.norm();
  if (options.require_positive && !(u.minCoeff() > 0.0))
    throw InvalidArgument("solve_regularized: start must be positive when require_positive is set");
  if (!std::isfinite(norm)) throw SolverFailure("newton", "residual is not finite at the initial guess", {}, u);

  NewtonResult out;
  out.initial_residual = norm;
  out.residual_history.push_back(norm);
  const double target = options.tol * (1.0 + norm);

  int it = 0;
  while (norm >= target) {
    if (it >= options.max_iter)
      throw SolverFailure("newton", "maximum iterations reached",
                          {{"iterations", it}, {"residual", norm}, {"target", target}}, u);
    ++it;
    const Eigen::VectorXd du = newton_direction(op, g, u, f);
    double step = 1.0;
    double trial_norm = std::numeric_limits<double>::infinity();
    Eigen::VectorXd trial;
    int bt = 0;
    for (; bt <= options.max_backtracks; ++bt) {
      trial = u + step * du;
      trial_norm = residual_norm(op, g, trial, options.require_positive);
      if (trial_norm <= (1.0 - options.armijo * step) * norm) break;
      step *= 0.5;
    }
    if (bt > options.max_backtracks) {
      throw SolverFailure("newton", "line search failed",
                          {{"iterations", it}, {"residual", norm}, {"target", target}}, u);
    }
    u = std::move(trial);
    f = nonlinear_residual(op, g, u);
    norm = f.norm();
    out.residual_history.push_back(norm);
  }

  out.u = Field(u0.domain, u);
  out.residual = norm;
  out.iterations = it;
  return out;
}

}  // namespace mixsing
