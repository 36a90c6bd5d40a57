#include "mixsing/multiplicity_solver.hpp"

#include "mixsing/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace mixsing {

namespace {

constexpr double kVerifySlack = 1e-9;

void require_power(const ProblemSpec& spec, const char* where)
{
  spec.validate();
  if (spec.kind != Nonlinearity::singular_power)
    throw InvalidArgument(std::string(where) + ": needs the lambda u^{-gamma} + u^q nonlinearity");
}

/// ((t+ + eps)^{1-gamma} - eps^{1-gamma}) / (1-gamma), stable for t << eps.
double singular_primitive(double t, double eps, double gamma)
{
  const double tp = std::max(t, 0.0);
  const double p = 1.0 - gamma;
  if (eps == 0.0) return std::pow(tp, p) / p;
  if (tp == 0.0) return 0.0;
  return std::pow(eps, p) * std::expm1(p * std::log1p(tp / eps)) / p;
}

/// Nonlinear part of the energy, integrated with lumped weights.
double source_energy(const ProblemSpec& spec, double eps, double m, const Eigen::VectorXd& u)
{
  double sing = 0.0;
  double power = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    sing += singular_primitive(u[i], eps, spec.gamma);
    const double tp = std::max(u[i], 0.0);
    power += std::pow(tp, spec.q + 1.0);
  }
  return m * (spec.lambda * sing + power / (spec.q + 1.0));
}

double local_norm(const MixedOperator& op, const Eigen::VectorXd& x) { return std::sqrt(x.dot(op.a_loc() * x)); }

Eigen::VectorXd gradient_vector(const MixedOperator& op, const ProblemSpec& spec, double eps, const Eigen::VectorXd& u)
{
  return nonlinear_residual(op, spec.regularized_rhs(eps), u);
}

double energy_vector(const MixedOperator& op, const ProblemSpec& spec, double eps, const Eigen::VectorXd& u)
{
  return 0.5 * u.dot(op.system() * u) - source_energy(spec, eps, op.mass(), u);
}

/// Energy restricted to the segment a + t (b - a), t in [0,1]; the quadratic
/// part is expanded once so each evaluation costs O(n).
struct Segment {
  Eigen::VectorXd a;
  Eigen::VectorXd d;
  double aa = 0.0, ad = 0.0, dd = 0.0;

  Segment(const MixedOperator& op, const Eigen::VectorXd& from, const Eigen::VectorXd& to) : a(from), d(to - from)
  {
    const Eigen::VectorXd ka = op.system() * a;
    const Eigen::VectorXd kd = op.system() * d;
    aa = a.dot(ka);
    ad = a.dot(kd);
    dd = d.dot(kd);
  }

  Eigen::VectorXd point(double t) const { return a + t * d; }

  double energy(const ProblemSpec& spec, double eps, double m, double t) const
  {
    return 0.5 * (aa + 2.0 * t * ad + t * t * dd) - source_energy(spec, eps, m, point(t));
  }
};

}  // namespace

double energy(const MixedOperator& op, const ProblemSpec& spec, double eps, const Field& u)
{
  require_same_domain(op.domain(), u.domain, "energy");
  if (eps < 0.0) throw InvalidArgument("energy: eps must be nonnegative");
  return energy_vector(op, spec, eps, u.values);
}

Field gradient(const MixedOperator& op, const ProblemSpec& spec, double eps, const Field& u)
{
  require_same_domain(op.domain(), u.domain, "gradient");
  if (!(eps > 0.0)) throw InvalidArgument("gradient: eps must be positive (the eps = 0 gradient is not globally defined)");
  return Field(u.domain, gradient_vector(op, spec, eps, u.values));
}

GradientCheck gradient_check(const MixedOperator& op, const ProblemSpec& spec, double eps, int pairs,
                             std::uint64_t seed)
{
  require_power(spec, "gradient_check");
  if (!(eps > 0.0)) throw InvalidArgument("gradient_check: eps must be positive");
  const auto n = static_cast<Eigen::Index>(op.domain().size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GradientCheck out;
  for (int k = 0; k < pairs; ++k) {
    Eigen::VectorXd u(n), d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u[i] = 0.2 + 0.8 * unit(rng);
      d[i] = 2.0 * unit(rng) - 1.0;
    }
    const double delta = 1e-5 * u.cwiseAbs().maxCoeff();
    const double central =
        (energy_vector(op, spec, eps, u + delta * d) - energy_vector(op, spec, eps, u - delta * d)) / (2.0 * delta);
    const double exact = gradient_vector(op, spec, eps, u).dot(d);
    const double scale = 1.0 + std::abs(energy_vector(op, spec, eps, u));
    out.max_error = std::max(out.max_error, std::abs(exact - central) / scale);
    ++out.pairs;
  }
  return out;
}

MountainPassParams calibrate_geometry(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec,
                                      const CalibrationOptions& options)
{
  require_power(spec, "calibrate_geometry");
  const Domain& d = op.domain();
  const double m = op.mass();
  const double q = spec.q;
  const double l = spec.exponent_l();
  const auto n = static_cast<Eigen::Index>(d.size());

  MountainPassParams p;
  p.e1 = eig.e1;
  p.theta = std::pow(d.measure(), 1.0 - (q + 1.0) / l);

  // Normalized ascent for max sum (v+)^{q+1}|cell| over ||grad v|| = 1. Each
  // step maximizes the linearization over the ellipsoid, so it never decreases.
  auto power_sum = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += std::pow(std::max(v[i], 0.0), q + 1.0);
    return s * m;
  };
  auto ascent = [&](Eigen::VectorXd v, double& value) {
    v /= local_norm(op, v);
    value = power_sum(v);
    Eigen::VectorXd w(n);
    for (int it = 0; it < options.max_ascent_iter; ++it) {
      for (Eigen::Index i = 0; i < n; ++i) w[i] = (q + 1.0) * m * std::pow(std::max(v[i], 0.0), q);
      w = op.solve_local(w);
      const double norm = local_norm(op, w);
      if (!(norm > 0.0)) break;
      v = w / norm;
      const double next = power_sum(v);
      const bool done = std::abs(next - value) < options.ascent_tol * next;
      value = next;
      if (done) break;
    }
    return v;
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = 0.0;
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd start(n);
    if (r == 0) {
      start = eig.e1.values;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) start[i] = r % 2 ? unit(rng) : normal(rng);
      start = op.solve_local(start);
      if (start.maxCoeff() <= 0.0) start = -start;
    }
    double value = 0.0;
    Eigen::VectorXd v = ascent(start, value);
    if (value > best) {
      best = value;
      p.ascent_maximizer = Field(d, v);
    }
  }
  if (!(best > 0.0)) throw SolverFailure("calibrate_geometry", "ascent did not find a positive embedding constant");
  p.embedding_C = best / p.theta;

  const double c_theta = p.embedding_C * p.theta;
  p.k = options.k;
  for (;;) {
    // The undefined exponent in the radius formula is read as 2.
    p.R = p.k * std::pow((q + 1.0) / (2.0 * c_theta), 1.0 / (q - 1.0));
    p.rho = 0.5 * (p.R * p.R / 2.0 - c_theta * std::pow(p.R, q + 1.0) / (q + 1.0));
    if (p.rho > 0.0) break;
    if (++p.k_shrinks > options.max_k_shrinks)
      throw SolverFailure("calibrate_geometry", "rim level stays nonpositive after shrinking k",
                          {{"k", p.k}, {"C", p.embedding_C}});
    p.k *= 0.5;
  }

  // Hoelder then discrete Poincare for the gradient norm (local eigenvalue).
  p.lambda1_local = principal_eigenpair(op.local_only()).lambda1;
  const double g = spec.gamma;
  p.singular_sup_bound = std::pow(p.lambda1_local, -(1.0 - g) / 2.0) * std::pow(p.R, 1.0 - g) *
                         std::pow(d.measure(), (1.0 + g) / 2.0) / (1.0 - g);
  p.Lambda_est = p.rho / p.singular_sup_bound;

  const Eigen::VectorXd& e = eig.e1.values;
  const double quad = e.dot(op.system() * e);
  const double power = power_sum(e);
  const double e_norm = local_norm(op, e);
  double t = 2.0 * p.R;
  bool found = false;
  for (int k = 0; k < 200; ++k, t *= 2.0) {
    const double lambda_free = 0.5 * t * t * quad - std::pow(t, q + 1.0) * power / (q + 1.0);
    if (lambda_free < -1.0 && t * e_norm > p.R) {
      found = true;
      break;
    }
  }
  if (!found) throw SolverFailure("calibrate_geometry", "no endpoint T with I(T e1) < -1 found");
  p.T = t;
  return p;
}

RimCheck rim_check(const MixedOperator& op, const ProblemSpec& spec, double eps, const MountainPassParams& params,
                   double lambda, int count, std::uint64_t seed)
{
  ProblemSpec at = spec;
  at.lambda = lambda;
  require_power(at, "rim_check");
  const auto n = static_cast<Eigen::Index>(op.domain().size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Eigen::VectorXd> fields{params.e1.values};
  if (params.ascent_maximizer.size() > 0) fields.push_back(params.ascent_maximizer.values);
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    // Alternate rough, smooth and positive smooth samples.
    if (k % 3 >= 1) v = op.solve_local(v);
    if (k % 3 == 2) v = v.cwiseAbs();
    fields.push_back(v);
  }

  RimCheck out;
  out.min_energy = std::numeric_limits<double>::infinity();
  for (Eigen::VectorXd& v : fields) {
    v *= params.R / local_norm(op, v);
    const double e = energy_vector(op, at, eps, v);
    out.min_energy = std::min(out.min_energy, e);
    if (e < params.rho) ++out.violations;
    ++out.count;
  }
  return out;
}

BallResult ball_minimizer(const MixedOperator& op, const ProblemSpec& spec, double eps,
                          const MountainPassParams& params, const BallOptions& options, const Field* warm_start)
{
  require_power(spec, "ball_minimizer");
  if (!(eps > 0.0)) throw InvalidArgument("ball_minimizer: eps must be positive");
  const double radius = params.R;
  auto project = [&](Eigen::VectorXd w) {
    const double nrm = local_norm(op, w);
    if (nrm > radius) w *= radius / nrm;
    return w;
  };

  Eigen::VectorXd v;
  if (warm_start) {
    require_same_domain(op.domain(), warm_start->domain, "ball_minimizer");
    v = project(warm_start->values);
  } else {
    // I(t e1) / t -> -lambda eps^{-gamma} int e1 < 0, so small multiples descend.
    double t = 1e-3 * radius / local_norm(op, params.e1.values);
    for (int k = 0; k < 60 && energy_vector(op, spec, eps, t * params.e1.values) >= 0.0; ++k) t *= 0.5;
    v = t * params.e1.values;
  }
  double e = energy_vector(op, spec, eps, v);
  if (!(e < 0.0)) throw SolverFailure("ball_minimizer", "start point does not have negative energy", {{"energy", e}}, v);

  // Barzilai-Borwein steps in the h1 metric with a nonmonotone Armijo test
  // against the worst of the last few energies. Energy differences at the
  // rounding level are not held against a step.
  BallResult out;
  double step = 1.0;
  bool converged = false;
  std::vector<double> recent{e};
  Eigen::VectorXd grad = gradient_vector(op, spec, eps, v);
  Eigen::VectorXd riesz = op.solve_local(grad);
  for (int it = 0; it < options.max_iter; ++it) {
    const double pg = local_norm(op, v - project(v - riesz));
    out.iterations = it;
    if (pg < options.tol) {
      converged = true;
      break;
    }
    const double reference = *std::max_element(recent.begin(), recent.end());
    const double noise = 1e-14 * (1.0 + std::abs(e) + std::abs(v.dot(op.system() * v)));
    Eigen::VectorXd trial;
    double et = 0.0;
    for (;;) {
      trial = project(v - step * riesz);
      et = energy_vector(op, spec, eps, trial);
      const double moved = local_norm(op, v - trial);
      if (et <= reference - 1e-4 * moved * moved / step + noise) break;
      step *= 0.5;
      if (step < 1e-14)
        throw SolverFailure("ball_minimizer", "projected line search failed", {{"iteration", it}, {"energy", e}}, v);
    }
    const Eigen::VectorXd next_grad = gradient_vector(op, spec, eps, trial);
    const Eigen::VectorXd next_riesz = op.solve_local(next_grad);
    const Eigen::VectorXd dv = trial - v;
    const double curvature = dv.dot(next_grad - grad);
    const double moved2 = dv.dot(op.a_loc() * dv);
    step = curvature > 0.0 ? std::clamp(moved2 / curvature, 1e-10, 1e6) : std::min(2.0 * step, 1e6);
    v = std::move(trial);
    e = et;
    grad = next_grad;
    riesz = next_riesz;
    recent.push_back(e);
    if (recent.size() > 10) recent.erase(recent.begin());
  }
  if (!converged)
    throw SolverFailure("ball_minimizer", "projected gradient did not converge", {{"iterations", options.max_iter}}, v);
  if (local_norm(op, v) >= radius - 1e-8)
    throw SolverFailure("ball_minimizer", "minimizer pinned to the rim (lambda too large for this geometry)",
                        {{"energy", e}, {"R", radius}}, v);

  const NewtonResult nr = solve_regularized(op, spec.regularized_rhs(eps), Field(op.domain(), v), options.newton);
  out.nu = nr.u;
  out.newton_iterations = nr.iterations;
  out.gradient_norm = nr.residual;
  out.energy = energy_vector(op, spec, eps, out.nu.values);
  out.h1 = h1_seminorm(out.nu);
  if (!(out.energy < 0.0) || out.h1 > radius || local_norm(op, out.nu.values - v) > 0.1 * radius)
    throw SolverFailure("ball_minimizer", "Newton polish left the ball minimizer",
                        {{"energy", out.energy}, {"h1", out.h1}, {"R", radius}}, out.nu.values);
  return out;
}

MountainPassResult mountain_pass(const MixedOperator& op, const ProblemSpec& spec, double eps,
                                 const MountainPassParams& params, const MountainPassOptions& options,
                                 const std::vector<Field>* warm_path)
{
  require_power(spec, "mountain_pass");
  if (!(eps > 0.0)) throw InvalidArgument("mountain_pass: eps must be positive");
  if (options.n_path < 2) throw InvalidArgument("mountain_pass: n_path must be at least 2");
  const int np = options.n_path;
  const double m = op.mass();

  std::vector<Eigen::VectorXd> path(static_cast<std::size_t>(np + 1));
  if (warm_path && warm_path->size() == path.size()) {
    for (std::size_t j = 0; j < path.size(); ++j) path[j] = (*warm_path)[j].values;
  } else {
    for (int j = 0; j <= np; ++j)
      path[static_cast<std::size_t>(j)] = (params.T * j / np) * params.e1.values;
  }
  std::vector<double> energies(path.size());
  auto refresh = [&] {
    for (std::size_t j = 0; j < path.size(); ++j) energies[j] = energy_vector(op, spec, eps, path[j]);
  };
  // Equal h1 arclength on each side of the pinned node, which keeps its place.
  auto redistribute = [&](std::size_t pin) {
    std::vector<double> arc(path.size(), 0.0);
    for (std::size_t j = 1; j < path.size(); ++j) arc[j] = arc[j - 1] + local_norm(op, path[j] - path[j - 1]);
    std::vector<Eigen::VectorXd> next(path);
    auto fill = [&](std::size_t first, std::size_t last) {
      std::size_t seg = first;
      for (std::size_t j = first + 1; j < last; ++j) {
        const double target = arc[first] + (arc[last] - arc[first]) * double(j - first) / double(last - first);
        while (seg + 1 < last && arc[seg + 1] < target) ++seg;
        const double len = arc[seg + 1] - arc[seg];
        const double t = len > 0.0 ? (target - arc[seg]) / len : 0.0;
        next[j] = path[seg] + t * (path[seg + 1] - path[seg]);
      }
    };
    fill(0, pin);
    fill(pin, path.size() - 1);
    path = std::move(next);
  };
  auto dual_gradient = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad, Eigen::VectorXd& riesz) {
    grad = gradient_vector(op, spec, eps, u);
    riesz = op.solve_local(grad);
    return std::sqrt(std::max(grad.dot(riesz), 0.0));
  };
  refresh();
  if (!(energies.back() < -1.0))
    throw InvalidArgument("mountain_pass: endpoint energy must be below -1 (calibrate T first)");

  MountainPassResult out;
  std::vector<double> step(path.size(), 1.0);
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  bool converged = false;
  std::size_t top = 0;
  Eigen::VectorXd grad, riesz, trial_grad, trial_riesz;
  int sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    if (sweep > 0 && sweep % options.redistribute_every == 0) {
      redistribute(top);
      refresh();
    }
    const std::size_t previous = top;
    top = static_cast<std::size_t>(std::max_element(energies.begin() + 1, energies.end() - 1) - energies.begin());

    // A newly selected top node first slides to the energy maximum of the
    // polyline through its neighbours.
    if (top != previous) {
      const Segment left(op, path[top - 1], path[top]);
      const Segment right(op, path[top], path[top + 1]);
      auto along = [&](double s) {
        return s < 1.0 ? left.energy(spec, eps, m, s) : right.energy(spec, eps, m, s - 1.0);
      };
      double lo = 0.0, hi = 2.0;
      double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
      double f1 = along(x1), f2 = along(x2);
      for (int k = 0; k < 40; ++k) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + golden * (hi - lo);
          f2 = along(x2);
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - golden * (hi - lo);
          f1 = along(x1);
        }
      }
      const double s = 0.5 * (lo + hi);
      const double fs = along(s);
      if (fs > energies[top]) {
        path[top] = s < 1.0 ? left.point(s) : right.point(s - 1.0);
        energies[top] = fs;
      }
    }

    const double gnorm = dual_gradient(path[top], grad, riesz);
    out.path_gradient = gnorm;
    if (gnorm < options.tol) {
      converged = true;
      break;
    }

    // Near the ridge: descend across the path and ascend along it (the path
    // tangent stands in for the unstable direction), accepted when the dual
    // gradient norm drops. Fixed points of this step are critical points.
    // Otherwise fall back to a damped transverse descent step.
    Eigen::VectorXd tangent = path[top + 1] - path[top - 1];
    const double tnorm = local_norm(op, tangent);
    Eigen::VectorXd across = riesz;
    double along_slope = 0.0;
    if (tnorm > 0.0) {
      tangent /= tnorm;
      along_slope = grad.dot(tangent);
      across -= along_slope * tangent;
    }
    double& tau = step[top];
    bool moved = false;
    for (int k = 0; k < 12 && !moved; ++k, tau *= 0.5) {
      const Eigen::VectorXd trial = path[top] - tau * (across - along_slope * tangent);
      if (dual_gradient(trial, trial_grad, trial_riesz) < gnorm) {
        path[top] = trial;
        energies[top] = energy_vector(op, spec, eps, trial);
        moved = true;
      }
    }
    if (moved) {
      tau = std::min(4.0 * tau, 10.0);
      continue;
    }
    tau = 1.0;
    const double slope = grad.dot(across);
    for (double t = 1.0; t > 1e-14; t *= 0.5) {
      const Eigen::VectorXd trial = path[top] - t * across;
      const double et = energy_vector(op, spec, eps, trial);
      if (et <= energies[top] - 1e-4 * t * slope) {
        path[top] = trial;
        energies[top] = et;
        moved = true;
        break;
      }
    }
    if (!moved) {
      nlohmann::json e = energies;
      throw SolverFailure("mountain_pass", "descent at the path maximum stalled above tolerance",
                          {{"sweep", sweep}, {"gradient", gnorm}, {"path_energies", e}}, path[top]);
    }
  }
  out.sweeps = sweep;
  out.path_max = energies[top];
  if (!converged) {
    nlohmann::json e = energies;
    throw SolverFailure("mountain_pass", "descent at the path maximum stalled above tolerance",
                        {{"sweeps", sweep}, {"gradient", out.path_gradient}, {"path_energies", e}}, path[top]);
  }

  const NewtonResult nr = solve_regularized(op, spec.regularized_rhs(eps), Field(op.domain(), path[top]), options.newton);
  out.zeta = nr.u;
  out.newton_iterations = nr.iterations;
  out.gradient_norm = nr.residual;
  out.energy = energy_vector(op, spec, eps, out.zeta.values);
  if (!(out.energy >= params.rho))
    throw SolverFailure("mountain_pass", "critical point found below the rim level rho",
                        {{"energy", out.energy}, {"rho", params.rho}}, out.zeta.values);
  out.path.reserve(path.size());
  for (auto& p : path) out.path.emplace_back(op.domain(), std::move(p));
  return out;
}

TwoSolutions solve_g2(const MixedOperator& op, const EigenPair& eig, const ProblemSpec& spec, const G2Options& options)
{
  require_power(spec, "solve_g2");
  return solve_g2(op, spec, calibrate_geometry(op, eig, spec, options.calibration), options);
}

TwoSolutions solve_g2(const MixedOperator& op, const ProblemSpec& spec, const MountainPassParams& params,
                      const G2Options& options)
{
  require_power(spec, "solve_g2");
  if (options.enforce_lambda_bound && !(spec.lambda < params.Lambda_est))
    throw SolverFailure("solve_g2", "lambda must be below the certified estimate Lambda_est",
                        {{"lambda", spec.lambda}, {"Lambda_est", params.Lambda_est}});
  const Domain& d = op.domain();
  const double m = op.mass();

  TwoSolutions out;
  out.params = params;
  out.barrier_constant = std::min(1.0, spec.lambda / 2.0);
  out.barrier = Field(d, op.solve(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d.size()), m * out.barrier_constant)));
  out.barrier_min = out.barrier.values.minCoeff();
  if (!(out.barrier_min > 0.0)) throw SolverFailure("solve_g2", "barrier is not positive");

  auto check_branch = [&](const Field& v, const char* name, double eps) {
    const double margin = (v.values - out.barrier.values).minCoeff();
    if (margin < -kVerifySlack * std::max(1.0, linf_norm(v)))
      throw SolverFailure("solve_g2", std::string(name) + " violates the barrier comparison",
                          {{"eps", eps}, {"margin", margin}}, v.values);
    return margin;
  };

  std::optional<Field> nu;
  std::optional<Field> zeta;
  std::vector<Field> path;
  bool cauchy = false;
  for (double eps : options.schedule.values()) {
    const BallResult ball = ball_minimizer(op, spec, eps, params, options.ball, nu ? &*nu : nullptr);
    const MountainPassResult mp = mountain_pass(op, spec, eps, params, options.mountain, path.empty() ? nullptr : &path);

    EpsTraceEntry row;
    row.eps = eps;
    row.energy_nu = ball.energy;
    row.energy_zeta = mp.energy;
    row.residual_nu = ball.gradient_norm;
    row.residual_zeta = mp.gradient_norm;
    row.h1_nu = ball.h1;
    row.h1_zeta = h1_seminorm(mp.zeta);
    row.mp_sweeps = mp.sweeps;
    if (nu) row.change_nu = h1_seminorm(Field(d, ball.nu.values - nu->values));
    if (zeta) row.change_zeta = h1_seminorm(Field(d, mp.zeta.values - zeta->values));
    if (!(row.energy_nu < 0.0 && params.rho <= row.energy_zeta))
      throw SolverFailure("solve_g2", "energy separation I(nu) < 0 < rho <= I(zeta) violated",
                          {{"eps", eps}, {"energy_nu", row.energy_nu}, {"energy_zeta", row.energy_zeta}});
    row.barrier_margin = std::min(check_branch(ball.nu, "nu", eps), check_branch(mp.zeta, "zeta", eps));

    const bool have_previous = nu.has_value();
    nu = ball.nu;
    zeta = mp.zeta;
    path = mp.path;
    out.Theta = std::max({out.Theta, row.h1_nu, row.h1_zeta});
    out.eps_trace.push_back(row);
    if (have_previous && row.change_nu < options.cauchy_tol && row.change_zeta < options.cauchy_tol) {
      cauchy = true;
      break;
    }
  }
  if (!cauchy) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& r : out.eps_trace) trace.push_back({{"eps", r.eps}, {"change_nu", r.change_nu}, {"change_zeta", r.change_zeta}});
    throw SolverFailure("solve_g2", "eps-continuation stagnated before both branches became Cauchy",
                        {{"trace", trace}});
  }

  // eps = 0: Newton on the unregularized system, kept positive by the barrier.
  NewtonOptions no = options.newton;
  no.require_positive = true;
  const ScalarRhs g0 = spec.rhs();
  const NewtonResult n0 = solve_regularized(op, g0, *nu, no);
  const NewtonResult z0 = solve_regularized(op, g0, *zeta, no);
  out.nu = n0.u;
  out.zeta = z0.u;
  out.newton_residual_nu = n0.residual;
  out.newton_residual_zeta = z0.residual;
  check_branch(out.nu, "nu_0", 0.0);
  check_branch(out.zeta, "zeta_0", 0.0);
  out.energy_nu = energy(op, spec, 0.0, out.nu);
  out.energy_zeta = energy(op, spec, 0.0, out.zeta);
  if (!(out.energy_nu < 0.0 && params.rho <= out.energy_zeta))
    throw SolverFailure("solve_g2", "energy separation lost in the eps -> 0 limit",
                        {{"energy_nu", out.energy_nu}, {"energy_zeta", out.energy_zeta}, {"rho", params.rho}});

  for (const auto& r : out.eps_trace) {
    out.limit_gap_nu.push_back(std::abs(r.energy_nu - out.energy_nu));
    out.limit_gap_zeta.push_back(std::abs(r.energy_zeta - out.energy_zeta));
  }
  out.residual_nu = weak_residual(op, spec, out.nu, options.n_test_fields, options.seed);
  out.residual_zeta = weak_residual(op, spec, out.zeta, options.n_test_fields, options.seed);
  out.distinctness = linf_norm(Field(d, out.nu.values - out.zeta.values));
  out.distinctness_ratio = out.distinctness / linf_norm(out.zeta);
  if (out.distinctness < 1e-6 * linf_norm(out.zeta))
    throw SolverFailure("solve_g2", "branches collapsed onto one solution",
                        {{"lambda", spec.lambda}, {"Lambda_est", params.Lambda_est}, {"distinctness", out.distinctness}});
  return out;
}

}  // namespace mixsing
