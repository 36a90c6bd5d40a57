#include "mixsing/problem.hpp"

#include "mixsing/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mixsing {

HFunction h_builtin(std::string_view name)
{
  if (name == "one") return {"one", [](double) { return 1.0; }, [](double) { return 0.0; }};
  if (name == "one-plus-t")
    return {"one-plus-t", [](double t) { return 1.0 + std::max(t, 0.0); },
            [](double t) { return t > 0.0 ? 1.0 : 0.0; }};
  if (name == "one-plus-log")
    return {"one-plus-log", [](double t) { return 1.0 + std::log1p(std::max(t, 0.0)); },
            [](double t) { return t > 0.0 ? 1.0 / (1.0 + t) : 0.0; }};
  throw InvalidArgument("unknown h function '" + std::string(name) + "' (expected one, one-plus-t, one-plus-log)");
}

std::vector<std::string> h_builtin_names() { return {"one", "one-plus-t", "one-plus-log"}; }

ProblemSpec ProblemSpec::with_h(double s, double gamma, double lambda, HFunction h)
{
  ProblemSpec p;
  p.kind = Nonlinearity::singular_h;
  p.s = s;
  p.gamma = gamma;
  p.lambda = lambda;
  p.h = std::move(h);
  return p;
}

ProblemSpec ProblemSpec::with_power(double s, double gamma, double lambda, double q, double r)
{
  ProblemSpec p;
  p.kind = Nonlinearity::singular_power;
  p.s = s;
  p.gamma = gamma;
  p.lambda = lambda;
  p.q = q;
  p.r = r;
  return p;
}

std::vector<std::string> ProblemSpec::violations() const
{
  std::vector<std::string> out;
  auto num = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  if (!(s > 0.0 && s < 1.0)) out.push_back("s = " + num(s) + " outside admissible range (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) out.push_back("gamma = " + num(gamma) + " outside admissible range (0,1)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) out.push_back("lambda = " + num(lambda) + " must be positive");
  if (kind == Nonlinearity::singular_h) {
    if (!h) {
      out.push_back("h function required for the lambda h(u) u^-gamma nonlinearity");
    } else if (!(h->value(0.0) > 0.0)) {
      out.push_back("h(0) = " + num(h->value(0.0)) + " must be positive");
    }
  } else {
    if (!(q > 1.0)) out.push_back("q = " + num(q) + " must exceed 1");
    if (r != 0.0 && !(r > q + 1.0)) out.push_back("r = " + num(r) + " must satisfy r > q + 1");
  }
  return out;
}

void ProblemSpec::validate() const
{
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid problem parameters:";
  for (const auto& e : v) msg += "\n  " + e;
  throw InvalidArgument(msg);
}

ScalarRhs ProblemSpec::rhs() const
{
  const double lam = lambda;
  const double gam = gamma;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (kind == Nonlinearity::singular_h) {
    const HFunction hf = *h;
    return {[=](double t) { return t > 0.0 ? lam * hf.value(t) * std::pow(t, -gam) : nan; },
            [=](double t) {
              if (!(t > 0.0)) return nan;
              return lam * (hf.derivative(t) * std::pow(t, -gam) - gam * hf.value(t) * std::pow(t, -gam - 1.0));
            }};
  }
  const double qq = q;
  return {[=](double t) { return t > 0.0 ? lam * std::pow(t, -gam) + std::pow(t, qq) : nan; },
          [=](double t) { return t > 0.0 ? -lam * gam * std::pow(t, -gam - 1.0) + qq * std::pow(t, qq - 1.0) : nan; }};
}

ScalarRhs ProblemSpec::regularized_rhs(double eps) const
{
  if (!(eps > 0.0)) throw InvalidArgument("regularized_rhs: eps must be positive");
  const double lam = lambda;
  const double gam = gamma;
  if (kind == Nonlinearity::singular_h) {
    const HFunction hf = *h;
    return {[=](double t) {
              const double tp = std::max(t, 0.0);
              return lam * hf.value(tp) * std::pow(tp + eps, -gam);
            },
            [=](double t) {
              if (t <= 0.0) return 0.0;
              return lam * (hf.derivative(t) * std::pow(t + eps, -gam) - gam * hf.value(t) * std::pow(t + eps, -gam - 1.0));
            }};
  }
  const double qq = q;
  return {[=](double t) {
            const double tp = std::max(t, 0.0);
            return lam * std::pow(tp + eps, -gam) + std::pow(tp, qq);
          },
          [=](double t) {
            if (t <= 0.0) return 0.0;
            return -lam * gam * std::pow(t + eps, -gam - 1.0) + qq * std::pow(t, qq - 1.0);
          }};
}

std::vector<double> EpsSchedule::values() const
{
  if (!(eps0 > 0.0) || !(ratio > 0.0 && ratio < 1.0) || !(floor > 0.0) || floor > eps0)
    throw InvalidArgument("eps schedule requires eps0 >= floor > 0 and ratio in (0,1)");
  std::vector<double> out;
  for (double e = eps0; e >= floor * (1.0 - 1e-12); e *= ratio) out.push_back(e);
  return out;
}

ScalarRhs constant_rhs(double c)
{
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

}  // namespace mixsing
