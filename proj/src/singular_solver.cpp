#include "mixsing/singular_solver.hpp"

#include "mixsing/diagnostics.hpp"
#include "mixsing/error.hpp"

#include <Eigen/Cholesky>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>

namespace mixsing {

namespace {

// Relative slack for nodewise inequality checks against computed solutions.
constexpr double kVerifySlack = 1e-9;

ProblemSpec unit_singular(double s, double gamma) { return ProblemSpec::with_h(s, gamma, 1.0, h_builtin("one")); }

void require_h_kind(const ProblemSpec& spec, const char* where)
{
  spec.validate();
  if (spec.kind != Nonlinearity::singular_h)
    throw InvalidArgument(std::string(where) + ": needs the lambda h(u) u^{-gamma} nonlinearity");
}

/// sup of |d/dt (h(t) t^{-gamma})| over [lo, hi], sampled geometrically.
double sampled_lipschitz(const HFunction& h, double gamma, double lo, double hi, int samples)
{
  auto slope = [&](double t) {
    return std::abs(h.derivative(t) * std::pow(t, -gamma) - gamma * h.value(t) * std::pow(t, -gamma - 1.0));
  };
  double best = slope(lo);
  if (!(hi > lo)) return best;
  const double ratio = std::log(hi / lo);
  for (int k = 1; k < samples; ++k) best = std::max(best, slope(lo * std::exp(ratio * k / (samples - 1))));
  return best;
}

}  // namespace

PureSingularResult solve_pure_singular(const MixedOperator& op, double gamma, const PureSingularOptions& options)
{
  const ProblemSpec unit = unit_singular(op.s(), gamma);
  unit.validate();

  PureSingularResult out;
  Field u(op.domain());
  bool cauchy = false;
  for (double eps : options.schedule.values()) {
    const NewtonResult nr = solve_regularized(op, unit.regularized_rhs(eps), u, options.newton);
    ContinuationStep step;
    step.eps = eps;
    step.residual = nr.residual;
    step.newton_iterations = nr.iterations;
    step.linf = linf_norm(nr.u);
    if (!(nr.u.values.minCoeff() > 0.0))
      throw SolverFailure("pure_singular", "regularized solution lost interior positivity",
                          {{"eps", eps}, {"min", nr.u.values.minCoeff()}}, nr.u.values);
    if (!out.trace.empty()) {
      step.h1_change = h1_seminorm(Field(op.domain(), nr.u.values - u.values));
      const double drop = (u.values - nr.u.values).maxCoeff();
      out.max_monotonicity_violation = std::max(out.max_monotonicity_violation, std::max(drop, 0.0));
      if (drop > kVerifySlack * std::max(1.0, step.linf))
        throw SolverFailure("pure_singular", "iterates not monotone in eps", {{"eps", eps}, {"decrease", drop}},
                            nr.u.values);
    }
    u = nr.u;
    out.residual = nr.residual;
    out.trace.push_back(step);
    if (out.trace.size() > 1 && step.h1_change < options.tol) {
      cauchy = true;
      break;
    }
  }
  if (!cauchy) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : out.trace) trace.push_back({{"eps", s.eps}, {"h1_change", s.h1_change}});
    throw SolverFailure("pure_singular", "eps-continuation stagnated before reaching the tolerance",
                        {{"trace", trace}, {"tol", options.tol}}, u.values);
  }

  if (options.polish_unregularized) {
    NewtonOptions no = options.newton;
    no.require_positive = true;
    const NewtonResult nr = solve_regularized(op, unit.rhs(), u, no);
    u = nr.u;
    out.residual = nr.residual;
  }

  out.v0 = u;
  out.linf = linf_norm(u);
  out.min_interior = u.values.minCoeff();
  if (!(out.min_interior > 0.0))
    throw SolverFailure("pure_singular", "solution is not positive at every interior node",
                        {{"min", out.min_interior}}, u.values);
  return out;
}

double find_a_lambda(const EigenPair& eig, const ProblemSpec& spec)
{
  require_h_kind(spec, "find_a_lambda");
  const HFunction& h = *spec.h;
  double a = 1.0;
  for (int k = 0; k <= 200; ++k, a *= 0.5) {
    bool ok = true;
    for (std::size_t i = 0; i < eig.e1.size() && ok; ++i) {
      const double t = a * eig.e1[i];
      if (t <= 0.0) continue;
      ok = eig.lambda1 * t <= spec.lambda * std::pow(t, -spec.gamma) * h.value(t);
    }
    if (ok) return a;
  }
  throw SolverFailure("find_a_lambda", "subsolution inequality not satisfiable within 200 halvings",
                      {{"lambda", spec.lambda}, {"lambda1", eig.lambda1}});
}

double find_b_lambda(const MixedOperator& op, const Field& v0, const ProblemSpec& spec)
{
  require_h_kind(spec, "find_b_lambda");
  require_same_domain(op.domain(), v0.domain, "find_b_lambda");
  if (!(v0.values.minCoeff() > 0.0)) throw InvalidArgument("find_b_lambda: v0 must be positive");
  const HFunction& h = *spec.h;
  const double vmax = linf_norm(v0);
  const double m = op.mass();
  const Eigen::VectorXd av0 = op.system() * v0.values;
  double b = 1.0;
  for (int k = 0; k <= 200; ++k, b *= 2.0) {
    const double t = b * vmax;
    if (std::pow(t, -(spec.gamma + 1.0)) * h.value(t) > 1.0 / (spec.lambda * std::pow(vmax, spec.gamma + 1.0)))
      continue;
    bool ok = true;
    for (Eigen::Index i = 0; i < av0.size() && ok; ++i) {
      const double ti = b * v0.values[i];
      const double rhs = m * spec.lambda * std::pow(ti, -spec.gamma) * h.value(ti);
      ok = b * av0[i] >= rhs * (1.0 - kVerifySlack);
    }
    if (ok) return b;
  }
  throw SolverFailure("find_b_lambda", "supersolution inequality not satisfiable within 200 doublings",
                      {{"lambda", spec.lambda}, {"linf_v0", vmax}});
}

double h_primitive(const HFunction& h, double gamma, double t)
{
  if (t <= 0.0) return 0.0;
  // tanh-sinh copes with the t^{-gamma} endpoint singularity directly.
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate([&](double x) { return h.value(x) * std::pow(x, -gamma); }, 0.0, t);
}

double g1_energy(const MixedOperator& op, const ProblemSpec& spec, const Field& u)
{
  require_h_kind(spec, "g1_energy");
  double source = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) source += h_primitive(*spec.h, spec.gamma, u[i]);
  return 0.5 * bilinear(op, u, u) - spec.lambda * source * op.mass();
}

SandwichCertificate solve_g1(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec,
                             const SandwichOptions& options)
{
  require_h_kind(spec, "solve_g1");
  return solve_g1(op, eig, spec, solve_pure_singular(op, spec.gamma, options.pure), options);
}

SandwichCertificate solve_g1(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec,
                             const PureSingularResult& pure, const SandwichOptions& options)
{
  require_h_kind(spec, "solve_g1");
  const Domain& d = op.domain();
  const HFunction& h = *spec.h;
  const double m = op.mass();

  SandwichCertificate cert;
  cert.pure = pure;
  cert.a_lambda = find_a_lambda(eig, spec);
  cert.b_lambda = find_b_lambda(op, pure.v0, spec);
  // Shrinking a keeps the subsolution inequality.
  for (int k = 0; k < 200 && (cert.a_lambda * eig.e1.values - cert.b_lambda * pure.v0.values).maxCoeff() > 0.0; ++k)
    cert.a_lambda *= 0.5;
  cert.sub = Field(d, cert.a_lambda * eig.e1.values);
  cert.sup = Field(d, cert.b_lambda * pure.v0.values);
  if ((cert.sub.values - cert.sup.values).maxCoeff() > 0.0)
    throw SolverFailure("solve_g1", "could not order the subsolution below the supersolution");
  if (!(cert.sub.values.minCoeff() > 0.0))
    throw SolverFailure("solve_g1", "subsolution is not positive at every interior node",
                        {{"min", cert.sub.values.minCoeff()}});

  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::VectorXd sigma(n);
  for (Eigen::Index i = 0; i < n; ++i)
    sigma[i] = spec.lambda * sampled_lipschitz(h, spec.gamma, cert.sub.values[i], cert.sup.values[i],
                                               options.lipschitz_samples);
  if (!options.nodal_shift)
    sigma.setConstant(spec.lambda * sampled_lipschitz(h, spec.gamma, cert.sub.values.minCoeff(),
                                                      cert.sup.values.maxCoeff(), options.lipschitz_samples));

  const ScalarRhs g = spec.rhs();
  const double slack = kVerifySlack * std::max(1.0, linf_norm(cert.sup));

  auto run = [&](const Eigen::VectorXd& shift, Eigen::VectorXd& u, int& iterations) -> bool {
    Eigen::MatrixXd k = op.system();
    k.diagonal() += m * shift;
    const Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw SolverFailure("solve_g1", "shifted system is not positive definite");
    u = cert.sub.values;
    Eigen::VectorXd rhs(n);
    for (iterations = 1; iterations <= options.max_iter; ++iterations) {
      for (Eigen::Index i = 0; i < n; ++i) rhs[i] = m * (g.value(u[i]) + shift[i] * u[i]);
      Eigen::VectorXd next = llt.solve(rhs);
      if ((u - next).maxCoeff() > slack || (next - cert.sup.values).maxCoeff() > slack) return false;
      const double change = h1_seminorm(Field(d, next - u));
      u = std::move(next);
      if (change < options.tol) return true;
    }
    throw SolverFailure("solve_g1", "monotone iteration did not converge",
                        {{"iterations", options.max_iter}, {"tol", options.tol}}, u);
  };

  Eigen::VectorXd u;
  int iterations = 0;
  if (!run(sigma, u, iterations)) {
    cert.shift_retried = true;
    sigma *= 10.0;
    if (!run(sigma, u, iterations))
      throw SolverFailure("solve_g1", "ordering violated during monotone iteration even with 10x shift",
                          {{"iteration", iterations}, {"shift_max", sigma.maxCoeff()}}, u);
  }
  cert.iterations = iterations;
  cert.shift_max = sigma.maxCoeff();

  if (options.polish) {
    NewtonOptions no = options.pure.newton;
    no.require_positive = true;
    try {
      const NewtonResult nr = solve_regularized(op, g, Field(d, u), no);
      const double below = (cert.sub.values - nr.u.values).maxCoeff();
      const double above = (nr.u.values - cert.sup.values).maxCoeff();
      if (below <= slack && above <= slack) {
        u = nr.u.values;
        cert.polished = true;
        cert.polish_iterations = nr.iterations;
      }
    } catch (const SolverFailure&) {
      // Keep the monotone limit.
    }
  }

  cert.solution = Field(d, u);
  cert.newton_residual = nonlinear_residual(op, g, u).norm();
  cert.ordering_defect =
      std::max({0.0, (cert.sub.values - u).maxCoeff(), (u - cert.sup.values).maxCoeff()});
  if (cert.ordering_defect > slack)
    throw SolverFailure("solve_g1", "solution left the sandwich", {{"defect", cert.ordering_defect}}, u);
  cert.min_interior = u.minCoeff();
  cert.linf = linf_norm(cert.solution);
  cert.residual = weak_residual(op, spec, cert.solution, options.n_test_fields, options.seed).max_weak_residual;
  cert.energy = g1_energy(op, spec, cert.solution);
  return cert;
}

}  // namespace mixsing
