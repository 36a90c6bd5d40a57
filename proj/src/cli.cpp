#include "mixsing/cli.hpp"

#include "mixsing/diagnostics.hpp"
#include "mixsing/eigen_solver.hpp"
#include "mixsing/error.hpp"
#include "mixsing/grid.hpp"
#include "mixsing/mixed_operator.hpp"
#include "mixsing/multiplicity_solver.hpp"
#include "mixsing/problem.hpp"
#include "mixsing/report.hpp"
#include "mixsing/singular_solver.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace mixsing {

namespace {

constexpr std::array<std::pair<Command, const char*>, 6> kCommands{{
    {Command::eigen, "eigen"},
    {Command::pure_singular, "pure-singular"},
    {Command::g1, "g1"},
    {Command::g2, "g2"},
    {Command::sweep_lambda, "sweep-lambda"},
    {Command::verify, "verify"},
}};

const char* describe(Command c)
{
  switch (c) {
    case Command::eigen: return "principal eigenpair of the mixed operator";
    case Command::pure_singular: return "positive solution of the purely singular problem";
    case Command::g1: return "sub/supersolution certificate for lambda h(u) u^-gamma";
    case Command::g2: return "two solutions for lambda u^-gamma + u^q";
    case Command::sweep_lambda: return "g2 over a geometric lambda grid";
    case Command::verify: return "operator, eigen, gradient and geometry self-checks";
  }
  return "";
}

std::optional<double> parse_number(const std::string& text)
{
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) return std::nullopt;
  return v;
}

bool uses_power(Command c) { return c == Command::g2 || c == Command::sweep_lambda || c == Command::verify; }

/// The problem the command solves; lambda "auto" is a placeholder here.
ProblemSpec problem_for(const RunConfig& c)
{
  const double lambda = parse_number(c.lambda).value_or(1.0);
  if (uses_power(c.command)) return ProblemSpec::with_power(c.s, c.gamma, lambda, c.q, c.r);
  const auto names = h_builtin_names();
  const bool known = std::find(names.begin(), names.end(), c.h) != names.end();
  const bool needs_h = c.command == Command::g1;
  const double gamma = c.command == Command::eigen ? 0.5 : c.gamma;
  return ProblemSpec::with_h(c.s, gamma, needs_h ? lambda : 1.0, h_builtin(known && needs_h ? c.h : "one"));
}

Domain domain_for(const RunConfig& c)
{
  std::vector<Interval> extent;
  std::vector<int> n;
  for (int a = 0; a < c.dim; ++a) {
    extent.push_back({c.extent[static_cast<std::size_t>(2 * a)], c.extent[static_cast<std::size_t>(2 * a + 1)]});
    n.push_back(c.n.size() == 1 ? c.n[0] : c.n[static_cast<std::size_t>(a)]);
  }
  return build_domain(c.dim, extent, n);
}

EpsSchedule schedule_for(const RunConfig& c) { return {c.eps0, c.eps_ratio, c.eps_floor}; }

NewtonOptions newton_for(const RunConfig& c)
{
  NewtonOptions o;
  o.max_iter = c.max_iter;
  return o;
}

G2Options g2_options(const RunConfig& c)
{
  G2Options o;
  o.schedule = schedule_for(c);
  o.cauchy_tol = c.tol;
  o.newton = newton_for(c);
  o.ball.newton = o.newton;
  o.mountain.newton = o.newton;
  o.seed = c.seed;
  o.calibration.seed = c.seed;
  return o;
}

struct Outcome {
  nlohmann::json result;
  bool checks_passed = true;
};

Outcome run_eigen(const RunConfig&, const MixedOperator& op, const fs::path& dir)
{
  const EigenPair eig = principal_eigenpair(op);
  write_field(dir / "e1.csv", eig.e1);
  return {{{"eigen", to_json(eig)}}};
}

Outcome run_pure(const RunConfig& c, const MixedOperator& op, const fs::path& dir)
{
  PureSingularOptions o;
  o.schedule = schedule_for(c);
  o.tol = c.tol;
  o.newton = newton_for(c);
  const PureSingularResult r = solve_pure_singular(op, c.gamma, o);
  const ProblemSpec unit = ProblemSpec::with_h(c.s, c.gamma, 1.0, h_builtin("one"));
  write_field(dir / "v0.csv", r.v0);
  write_continuation_trace(dir / "continuation.csv", r.trace);
  return {{{"pure_singular", to_json(r)}, {"weak_residual", to_json(weak_residual(op, unit, r.v0, 20, c.seed))}}};
}

Outcome run_g1(const RunConfig& c, const MixedOperator& op, const fs::path& dir)
{
  const EigenPair eig = principal_eigenpair(op);
  const ProblemSpec spec = problem_for(c);
  SandwichOptions o;
  o.seed = c.seed;
  o.pure.schedule = schedule_for(c);
  o.pure.tol = c.tol;
  o.pure.newton = newton_for(c);
  const SandwichCertificate cert = solve_g1(op, eig, spec, o);
  write_field(dir / "sub.csv", cert.sub);
  write_field(dir / "sup.csv", cert.sup);
  write_field(dir / "solution.csv", cert.solution);
  write_field(dir / "v0.csv", cert.pure.v0);
  return {{{"eigen", to_json(eig)}, {"certificate", to_json(cert)}}};
}

double resolve_lambda(const std::string& text, const MountainPassParams& params)
{
  if (text == "auto") return params.Lambda_est / 4.0;
  return *parse_number(text);
}

Outcome run_g2(const RunConfig& c, const MixedOperator& op, const fs::path& dir)
{
  const EigenPair eig = principal_eigenpair(op);
  ProblemSpec spec = problem_for(c);
  const G2Options o = g2_options(c);
  const MountainPassParams params = calibrate_geometry(op, eig, spec, o.calibration);
  spec.lambda = resolve_lambda(c.lambda, params);
  const RimCheck rim = rim_check(op, spec, o.schedule.eps0, params, spec.lambda, 50, c.seed);
  const TwoSolutions two = solve_g2(op, spec, params, o);
  write_field(dir / "nu.csv", two.nu);
  write_field(dir / "zeta.csv", two.zeta);
  write_field(dir / "barrier.csv", two.barrier);
  write_eps_trace(dir / "eps_trace.csv", two.eps_trace);
  return {{{"lambda", spec.lambda}, {"eigen", to_json(eig)}, {"rim_check", to_json(rim)}, {"two_solutions", to_json(two)}}};
}

Outcome run_sweep(const RunConfig& c, const MixedOperator& op, const fs::path& dir)
{
  const EigenPair eig = principal_eigenpair(op);
  ProblemSpec spec = problem_for(c);
  G2Options o = g2_options(c);
  o.enforce_lambda_bound = false;
  const MountainPassParams params = calibrate_geometry(op, eig, spec, o.calibration);
  const double start = resolve_lambda(c.sweep_start, params);

  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json empirical = nullptr;
  std::ofstream csv(dir / "sweep.csv", std::ios::binary);
  csv << "lambda,certified,energy_nu,energy_zeta,distinctness_ratio\n";
  for (int k = 0; k < c.sweep_count; ++k) {
    spec.lambda = start * std::pow(c.sweep_ratio, k);
    nlohmann::json row{{"lambda", spec.lambda}};
    char line[160];
    try {
      const TwoSolutions two = solve_g2(op, spec, params, o);
      row["certified"] = true;
      row["energy_nu"] = two.energy_nu;
      row["energy_zeta"] = two.energy_zeta;
      row["distinctness_ratio"] = two.distinctness_ratio;
      empirical = spec.lambda;
      std::snprintf(line, sizeof line, "%.17g,1,%.17g,%.17g,%.17g\n", spec.lambda, two.energy_nu, two.energy_zeta,
                    two.distinctness_ratio);
    } catch (const SolverFailure& e) {
      row["certified"] = false;
      row["failure"] = {{"stage", e.stage()}, {"message", e.message()}};
      std::snprintf(line, sizeof line, "%.17g,0,,,\n", spec.lambda);
    }
    csv << line;
    rows.push_back(row);
  }
  return {{{"geometry", to_json(params)},
           {"Lambda_est", params.Lambda_est},
           {"empirical_Lambda", empirical},
           {"sweep", rows}}};
}

Outcome run_verify(const RunConfig& c, const MixedOperator& op, const fs::path&)
{
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  auto record = [&](const char* name, bool passed, double value, double threshold) {
    checks.push_back({{"name", name}, {"passed", passed}, {"value", value}, {"threshold", threshold}});
    all = all && passed;
  };

  const Eigen::MatrixXd& frac = op.a_frac();
  const double scale = std::max(frac.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (frac - frac.transpose()).cwiseAbs().maxCoeff() / scale;
  record("a_frac_symmetry", asym <= 1e-12, asym, 1e-12);

  const Eigen::MatrixXd& sys = op.system();
  double worst_off = -std::numeric_limits<double>::infinity();
  double worst_diag = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < sys.cols(); ++j)
    for (Eigen::Index i = 0; i < sys.rows(); ++i) {
      if (i == j) worst_diag = std::min(worst_diag, sys(i, j));
      else worst_off = std::max(worst_off, sys(i, j));
    }
  record("m_matrix_offdiagonal", worst_off <= 0.0, worst_off, 0.0);
  record("m_matrix_diagonal", worst_diag > 0.0, worst_diag, 0.0);

  const EigenPair eig = principal_eigenpair(op);
  record("e1_positive", eig.min_interior > 0.0, eig.min_interior, 0.0);
  if (op.domain().size() <= 2000) {
    const double dense = dense_eigen_oracle(op).front();
    const double rel = std::abs(dense - eig.lambda1) / dense;
    record("lambda1_vs_dense_oracle", rel <= 1e-10, rel, 1e-10);
  }

  ProblemSpec spec = problem_for(c);
  const MountainPassParams params = calibrate_geometry(op, eig, spec, g2_options(c).calibration);
  spec.lambda = resolve_lambda(c.lambda, params);
  for (double eps : {1.0, 1e-2, 1e-4}) {
    const GradientCheck g = gradient_check(op, spec, eps, 20, c.seed);
    char name[48];
    std::snprintf(name, sizeof name, "gradient_fd_eps_%g", eps);
    record(name, g.max_error <= 1e-6, g.max_error, 1e-6);
  }
  const RimCheck rim = rim_check(op, spec, c.eps0, params, params.Lambda_est / 2.0, 50, c.seed);
  record("rim_violations_at_half_Lambda_est", rim.violations == 0, rim.violations, 0.0);
  ProblemSpec half = spec;
  half.lambda = params.Lambda_est / 2.0;
  const double end = energy(op, half, c.eps0, Field(op.domain(), params.T * eig.e1.values));
  record("endpoint_energy_below_minus_one", end < -1.0, end, -1.0);

  return {{{"checks", checks}, {"all_passed", all}, {"geometry", to_json(params)}}, all};
}

}  // namespace

std::optional<Command> parse_command(const std::string& name)
{
  for (const auto& [c, n] : kCommands)
    if (name == n) return c;
  return std::nullopt;
}

std::string command_name(Command c)
{
  for (const auto& [k, n] : kCommands)
    if (k == c) return n;
  return "unknown";
}

std::vector<std::string> validate(const RunConfig& c)
{
  std::vector<std::string> out;
  if (c.dim != 1 && c.dim != 2) out.push_back("dim = " + std::to_string(c.dim) + " must be 1 or 2");
  const int dim = c.dim == 2 ? 2 : 1;
  if (c.extent.size() != static_cast<std::size_t>(2 * dim)) {
    out.push_back("extent needs " + std::to_string(2 * dim) + " numbers (lo hi per axis), got " +
                  std::to_string(c.extent.size()));
  } else {
    for (int a = 0; a < dim; ++a)
      if (!(c.extent[static_cast<std::size_t>(2 * a)] < c.extent[static_cast<std::size_t>(2 * a + 1)]))
        out.push_back("extent axis " + std::to_string(a) + " must have lo < hi");
  }
  if (c.n.size() != 1 && c.n.size() != static_cast<std::size_t>(dim))
    out.push_back("n needs 1 or " + std::to_string(dim) + " values");
  for (int v : c.n)
    if (v < 3) out.push_back("n = " + std::to_string(v) + " must be at least 3");

  for (const auto& v : problem_for(c).violations()) out.push_back(v);
  const bool auto_ok = uses_power(c.command);
  if (!(c.lambda == "auto" && auto_ok) && c.command != Command::eigen && c.command != Command::pure_singular &&
      !parse_number(c.lambda))
    out.push_back("lambda = '" + c.lambda + "' must be a number" + (auto_ok ? " or auto" : ""));
  if (c.command == Command::g1) {
    const auto names = h_builtin_names();
    if (std::find(names.begin(), names.end(), c.h) == names.end()) {
      std::string known;
      for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
      out.push_back("h = '" + c.h + "' unknown (known: " + known + ")");
    }
  }

  if (!(c.eps0 > 0.0)) out.push_back("eps0 must be positive");
  if (!(c.eps_ratio > 0.0 && c.eps_ratio < 1.0)) out.push_back("eps-ratio must lie in (0,1)");
  if (!(c.eps_floor > 0.0 && c.eps_floor <= c.eps0)) out.push_back("eps-floor must lie in (0, eps0]");
  if (!(c.tol > 0.0)) out.push_back("tol must be positive");
  if (c.max_iter < 1) out.push_back("max-iter must be at least 1");
  if (c.command == Command::sweep_lambda) {
    if (c.sweep_start != "auto" && !(parse_number(c.sweep_start).value_or(0.0) > 0.0))
      out.push_back("sweep-start must be a positive number or auto");
    if (!(c.sweep_ratio > 1.0)) out.push_back("sweep-ratio must exceed 1");
    if (c.sweep_count < 1) out.push_back("sweep-count must be at least 1");
  }

  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  const fs::path probe = fs::path(c.output_dir) / ".write-probe";
  if (std::ofstream(probe).good()) fs::remove(probe, ec);
  else out.push_back("output-dir '" + c.output_dir + "' is not writable");
  return out;
}

nlohmann::json config_json(const RunConfig& c)
{
  return {{"command", command_name(c.command)},
          {"dim", c.dim},
          {"extent", c.extent},
          {"n", c.n},
          {"s", c.s},
          {"gamma", c.gamma},
          {"lambda", c.lambda},
          {"q", c.q},
          {"r", c.r},
          {"h", c.h},
          {"eps0", c.eps0},
          {"eps_ratio", c.eps_ratio},
          {"eps_floor", c.eps_floor},
          {"tol", c.tol},
          {"max_iter", c.max_iter},
          {"seed", c.seed},
          {"sweep_start", c.sweep_start},
          {"sweep_ratio", c.sweep_ratio},
          {"sweep_count", c.sweep_count}};
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err)
{
  const fs::path dir(config.output_dir);
  auto fail = [&](const nlohmann::json& f, int code) {
    err << f.dump(2) << '\n';
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
      try {
        write_json(dir / "failure.json", f);
      } catch (const std::exception&) {
      }
    }
    return code;
  };

  const auto errors = validate(config);
  if (!errors.empty())
    return fail({{"stage", "config"}, {"message", "invalid configuration"}, {"data", {{"errors", errors}}}}, 1);

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Domain> domain;
  try {
    domain = domain_for(config);
    const MixedOperator op = assemble(*domain, config.s);
    Outcome outcome;
    switch (config.command) {
      case Command::eigen: outcome = run_eigen(config, op, dir); break;
      case Command::pure_singular: outcome = run_pure(config, op, dir); break;
      case Command::g1: outcome = run_g1(config, op, dir); break;
      case Command::g2: outcome = run_g2(config, op, dir); break;
      case Command::sweep_lambda: outcome = run_sweep(config, op, dir); break;
      case Command::verify: outcome = run_verify(config, op, dir); break;
    }
    const nlohmann::json report{{"config", config_json(config)}, {"domain", to_json(*domain)}, {"result", outcome.result}};
    write_json(dir / "report.json", report);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json(dir / "timing.json", {{"seconds", seconds}, {"output_dir", dir.string()}});
    out << report.dump(2) << '\n';
    return outcome.checks_passed ? 0 : 3;
  } catch (const SolverFailure& e) {
    if (domain && static_cast<std::size_t>(e.last_iterate().size()) == domain->size()) {
      try {
        write_field(dir / "last_iterate.csv", Field(*domain, e.last_iterate()));
      } catch (const std::exception&) {
      }
    }
    return fail(e.to_json(), 2);
  } catch (const InvalidArgument& e) {
    return fail({{"stage", "input"}, {"message", e.what()}, {"data", nlohmann::json::object()}}, 1);
  }
}

int cli_main(int argc, char** argv)
{
  CLI::App app{"Solvers for -Lap u + (-Lap)^s u = g(u) with singular g"};
  RunConfig c;
  // --h names the h function, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "File of `key = value` lines (keys are long flag names); flags override it");
  app.add_option("--dim", c.dim, "Space dimension, 1 or 2")->capture_default_str();
  app.add_option("--extent", c.extent, "lo hi per axis")->expected(2, 4)->capture_default_str();
  app.add_option("--n", c.n, "Interior nodes per axis")->expected(1, 2)->capture_default_str();
  app.add_option("--s", c.s, "Fractional order in (0,1)")->capture_default_str();
  app.add_option("--gamma", c.gamma, "Singular exponent in (0,1)")->capture_default_str();
  app.add_option("--lambda", c.lambda, "Number, or auto (Lambda_est/4) for g2 and verify")->capture_default_str();
  app.add_option("--q", c.q, "Power exponent, q > 1")->capture_default_str();
  app.add_option("--r", c.r, "Integrability exponent, r > q + 1 (0: q + 2)")->capture_default_str();
  app.add_option("--h", c.h, "one | one-plus-t | one-plus-log")->capture_default_str();
  app.add_option("--eps0", c.eps0, "First regularization level")->capture_default_str();
  app.add_option("--eps-ratio", c.eps_ratio, "eps shrink factor per level, in (0,1)")->capture_default_str();
  app.add_option("--eps-floor", c.eps_floor, "Smallest eps tried")->capture_default_str();
  app.add_option("--tol", c.tol, "Cauchy tolerance of the eps-continuation")->capture_default_str();
  app.add_option("--max-iter", c.max_iter, "Newton iteration cap")->capture_default_str();
  app.add_option("--seed", c.seed, "Seed for random test fields and restarts")->capture_default_str();
  app.add_option("--sweep-start", c.sweep_start, "First lambda of the sweep, or auto (Lambda_est/4)")->capture_default_str();
  app.add_option("--sweep-ratio", c.sweep_ratio, "Growth factor between sweep points")->capture_default_str();
  app.add_option("--sweep-count", c.sweep_count, "Number of sweep points")->capture_default_str();
  app.add_option("--output-dir", c.output_dir, "Directory for report.json and CSV fields")->capture_default_str();
  for (const auto& [cmd, name] : kCommands) app.add_subcommand(name, describe(cmd))->fallthrough();
  app.require_subcommand(1, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  c.command = *parse_command(app.get_subcommands().front()->get_name());
  return run(c, std::cout, std::cerr);
}

}  // namespace mixsing
