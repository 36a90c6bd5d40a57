#include "mixsing/eigen_solver.hpp"

#include "mixsing/error.hpp"

#include <cmath>

namespace mixsing {

namespace {

double rayleigh(const MixedOperator& op, const Eigen::VectorXd& x)
{
  return x.dot(op.system() * x) / (op.mass() * x.squaredNorm());
}

}  // namespace

EigenPair principal_eigenpair(const MixedOperator& op, const EigenOptions& options)
{
  if (!(options.tol > 0.0)) throw InvalidArgument("principal_eigenpair: tol must be positive");

  const Domain& d = op.domain();
  const double m = op.mass();
  const auto n = static_cast<Eigen::Index>(d.size());
  auto normalize = [m](Eigen::VectorXd& x) { x /= std::sqrt(x.squaredNorm() * m); };

  // Positive start: the principal mode of an M-matrix has one sign.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  normalize(x);
  double lambda = rayleigh(op, x);
  double lambda_change = 0.0;
  int it = 0;
  bool converged = false;
  while (it < options.max_iter) {
    ++it;
    x = op.solve(m * x);
    normalize(x);
    const double next = rayleigh(op, x);
    lambda_change = std::abs(next - lambda);
    lambda = next;
    const double rel_residual = (op.system() * x - lambda * m * x).norm() / (lambda * m * x.norm());
    const bool done = lambda_change < options.tol * std::abs(lambda) && rel_residual < options.residual_tol;
    if (done) {
      converged = true;
      break;
    }
  }
  const double residual = (op.system() * x - lambda * m * x).norm();
  if (!converged)
    throw SolverFailure("eigen", "inverse iteration did not converge",
                        {{"iterations", it}, {"lambda1", lambda}, {"lambda_change", lambda_change}, {"residual", residual}},
                        x);

  if (x.sum() < 0.0) x = -x;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i] < -1e-10)
      throw SolverFailure("eigen", "principal eigenvector changes sign",
                          {{"node", i}, {"value", x[i]}}, x);
    if (x[i] < 0.0) x[i] = 0.0;
  }

  EigenPair out;
  out.lambda1 = lambda;
  out.e1 = Field(d, x);
  out.residual = residual;
  out.iterations = it;
  out.min_interior = x.minCoeff();

  // Deflated probe: inverse iteration M-orthogonal to e1.
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0) + 0.1 * Eigen::VectorXd::Ones(n);
  auto deflate = [&](Eigen::VectorXd& v) { v -= (v.dot(x) * m) * x; };
  deflate(y);
  for (int k = 0; k < options.probe_iter && y.norm() > 0.0; ++k) {
    normalize(y);
    y = op.solve(m * y);
    deflate(y);
  }
  out.lambda2_estimate = y.norm() > 0.0 ? rayleigh(op, y) : lambda;
  out.simple = out.lambda2_estimate > lambda * (1.0 + 1e-6);
  return out;
}

}  // namespace mixsing
