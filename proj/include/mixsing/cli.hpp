#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mixsing {

enum class Command { eigen, pure_singular, g1, g2, sweep_lambda, verify };

/// "eigen", "pure-singular", "g1", "g2", "sweep-lambda", "verify".
std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

struct RunConfig {
  Command command = Command::eigen;
  int dim = 1;
  /// lo, hi per axis.
  std::vector<double> extent{-1.0, 1.0};
  /// Interior nodes per axis; a single value is used for every axis.
  std::vector<int> n{127};
  double s = 0.5;
  double gamma = 0.5;
  /// A positive number, or "auto" (a quarter of Lambda_est, g2 only).
  std::string lambda = "1";
  double q = 2.0;
  /// 0 selects q + 2.
  double r = 0.0;
  std::string h = "one";
  double eps0 = 1.0;
  double eps_ratio = 0.5;
  double eps_floor = 1e-8;
  /// Cauchy tolerance (h1 seminorm) of the eps-continuations.
  double tol = 1e-6;
  /// Newton iteration cap.
  int max_iter = 100;
  std::uint64_t seed = 12345;
  /// sweep-lambda grid: lambda_k = start * ratio^k, k < count. start "auto"
  /// is a quarter of Lambda_est.
  std::string sweep_start = "auto";
  double sweep_ratio = 2.0;
  int sweep_count = 12;
  std::string output_dir = "out";
};

/// Every problem with the configuration, one message each.
std::vector<std::string> validate(const RunConfig& config);

/// All settings except output_dir, which would break report reproducibility.
nlohmann::json config_json(const RunConfig& config);

/// Runs the pipeline and writes report.json, timing.json and CSV fields, or
/// failure.json. Returns 0 on success, 1 for invalid configuration, 2 for a
/// pipeline failure, 3 when `verify` finds a failed check.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses flags (and an optional `--config` file of `key = value` lines;
/// flags win) and calls run().
int cli_main(int argc, char** argv);

}  // namespace mixsing
