#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mixsing {

/// Scalar right-hand side g(t) with its derivative.
struct ScalarRhs {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// The factor h in lambda * h(u) * u^{-gamma}. Must be continuous,
/// nondecreasing and positive at 0.
struct HFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

/// "one", "one-plus-t", "one-plus-log" (1 + log(1 + t)).
HFunction h_builtin(std::string_view name);
std::vector<std::string> h_builtin_names();

enum class Nonlinearity { singular_h, singular_power };

/// Parameters of -Lap u + (-Lap)^s u = g(u).
///   singular_h:     g(u) = lambda h(u) u^{-gamma}
///   singular_power: g(u) = lambda u^{-gamma} + u^q
struct ProblemSpec {
  Nonlinearity kind = Nonlinearity::singular_h;
  double s = 0.5;
  double gamma = 0.5;
  double lambda = 1.0;
  double q = 2.0;
  /// Integrability exponent l used for the power term; 0 means q + 2.
  double r = 0.0;
  std::optional<HFunction> h;

  static ProblemSpec with_h(double s, double gamma, double lambda, HFunction h);
  static ProblemSpec with_power(double s, double gamma, double lambda, double q, double r = 0.0);

  double exponent_l() const { return r > 0.0 ? r : q + 2.0; }

  /// Every violated range, one message each. Empty when valid.
  std::vector<std::string> violations() const;
  /// Throws InvalidArgument listing all violations.
  void validate() const;

  /// The unregularized g, defined for t > 0.
  ScalarRhs rhs() const;
  /// lambda (t+ + eps)^{-gamma} [+ (t+)^q]; equals rhs() shifted by eps.
  ScalarRhs regularized_rhs(double eps) const;
};

/// eps_k = eps0 * ratio^k for all k with eps_k >= floor.
struct EpsSchedule {
  double eps0 = 1.0;
  double ratio = 0.5;
  double floor = 1e-8;

  std::vector<double> values() const;
};

/// g(t) = c.
ScalarRhs constant_rhs(double c);

}  // namespace mixsing
