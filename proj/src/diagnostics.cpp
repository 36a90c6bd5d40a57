#include "mixsing/diagnostics.hpp"

#include "mixsing/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace mixsing {

std::vector<Field> bump_test_fields(const Domain& domain, int count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    std::array<double, 2> center{0.0, 0.0};
    std::array<double, 2> width{1.0, 1.0};
    for (int a = 0; a < domain.dim(); ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const Interval& iv = domain.extent(a);
      width[ua] = (0.1 + 0.3 * unit(rng)) * iv.length();
      center[ua] = iv.lo + width[ua] + unit(rng) * (iv.length() - 2.0 * width[ua]);
    }
    const double amplitude = 0.5 + unit(rng);
    out.push_back(sample(domain, [&](double x, double y) {
      double v = amplitude;
      const std::array<double, 2> p{x, y};
      for (int a = 0; a < domain.dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const double t = (p[ua] - center[ua]) / width[ua];
        v *= std::abs(t) < 1.0 ? (1.0 - t * t) * (1.0 - t * t) : 0.0;
      }
      return v;
    }));
  }
  return out;
}

ResidualReport weak_residual(const MixedOperator& op, const ScalarRhs& g, const Field& u, int n_tests,
                             std::uint64_t seed)
{
  require_same_domain(op.domain(), u.domain, "weak_residual");
  const double m = op.mass();
  Eigen::VectorXd source(u.values.size());
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    source[i] = g.value(u.values[i]);
    if (!std::isfinite(source[i]))
      throw InvalidArgument("weak_residual: nonlinearity undefined at node " + std::to_string(i) +
                            " (u = " + std::to_string(u.values[i]) + ")");
  }
  const Eigen::VectorXd au = op.system() * u.values;

  ResidualReport rep;
  rep.n_test_fields = n_tests;
  for (const Field& phi : bump_test_fields(u.domain, n_tests, seed)) {
    // Both sides are evaluated independently: B(u, phi) from the assembled
    // matrices, the source integral by lumped quadrature.
    const double lhs = phi.values.dot(au);
    double rhs = 0.0;
    for (Eigen::Index i = 0; i < phi.values.size(); ++i) rhs += source[i] * phi.values[i] * m;
    const double scale = h1_seminorm(phi);
    rep.max_weak_residual = std::max(rep.max_weak_residual, std::abs(lhs - rhs) / scale);
  }
  rep.symmetry_defect = symmetry_defect(u);
  return rep;
}

ResidualReport weak_residual(const MixedOperator& op, const ProblemSpec& spec, const Field& u, int n_tests,
                             std::uint64_t seed)
{
  return weak_residual(op, spec.rhs(), u, n_tests, seed);
}

double symmetry_defect(const Field& u)
{
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - u[u.domain.mirror(i)]));
  return d;
}

std::vector<double> dense_eigen_oracle(const MixedOperator& op)
{
  if (op.domain().size() > 2000)
    throw InvalidArgument("dense_eigen_oracle: at most 2000 unknowns, got " + std::to_string(op.domain().size()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.system() / op.mass(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverFailure("dense_eigen_oracle", "eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double observed_embedding_constant(const MixedOperator& op, int count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(op.domain().size());
  double c = 0.0;
  for (int k = 0; k < count; ++k) {
    Field f(op.domain());
    // Mix rough and smooth fields: raw noise and its local-Laplacian smoothing.
    for (Eigen::Index i = 0; i < n; ++i) f.values[i] = normal(rng);
    if (k % 2 == 1) f.values = op.solve_local(f.values);
    const double semi = h1_seminorm(f);
    c = std::max(c, gagliardo_energy(op, f) / (semi * semi));
  }
  return c;
}

Field interpolate_1d(const Field& coarse, const Domain& fine)
{
  const Domain& cd = coarse.domain;
  if (cd.dim() != 1 || fine.dim() != 1 || !(cd.extent(0) == fine.extent(0)))
    throw InvalidArgument("interpolate_1d: need 1D fields on the same interval");
  const int nc = cd.n_interior(0);
  const double h = cd.h(0);
  const double lo = cd.extent(0).lo;
  auto value_at = [&](int k) { return k >= 1 && k <= nc ? coarse[static_cast<std::size_t>(k - 1)] : 0.0; };
  return sample(fine, [&](double x, double) {
    const double t = (x - lo) / h;
    const int k = std::clamp(static_cast<int>(std::floor(t)), 0, nc);
    const double frac = t - k;
    return (1.0 - frac) * value_at(k) + frac * value_at(k + 1);
  });
}

double transferred_weak_residual(const MixedOperator& fine_op, const ScalarRhs& g, const Field& coarse,
                                 int n_tests, std::uint64_t seed)
{
  const Field u = interpolate_1d(coarse, fine_op.domain());
  return weak_residual(fine_op, g, u, n_tests, seed).max_weak_residual;
}

}  // namespace mixsing
