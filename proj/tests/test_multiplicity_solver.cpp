#include "mixsing/error.hpp"
#include "mixsing/multiplicity_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mixsing;

namespace {

struct Fixture1d {
  Domain d = build_domain(1, {{-1, 1}}, {63});
  MixedOperator op = assemble(d, 0.5);
  EigenPair eig = principal_eigenpair(op);
  ProblemSpec spec = ProblemSpec::with_power(0.5, 0.5, 1.0, 2.0);
  MountainPassParams params = calibrate_geometry(op, eig, spec);
  ProblemSpec at(double lambda) const
  {
    ProblemSpec p = spec;
    p.lambda = lambda;
    return p;
  }
};

const Fixture1d& setup()
{
  static const Fixture1d s;
  return s;
}

Field random_field(const Domain& d, std::uint64_t seed, double lo, double hi)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(d);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng);
  return f;
}

}  // namespace

TEST(Energy, VanishesAtZeroAndDecreasesWithLambda)
{
  const Fixture1d& s = setup();
  EXPECT_EQ(energy(s.op, s.spec, 0.1, Field(s.d)), 0.0);
  for (int k = 0; k < 10; ++k) {
    const Field u = random_field(s.d, static_cast<std::uint64_t>(k), -0.5, 2.0);
    const double free = energy(s.op, s.at(1e-300), 0.1, u);
    for (double lambda : {0.1, 1.0, 5.0}) EXPECT_LE(energy(s.op, s.at(lambda), 0.1, u), free);
  }
}

TEST(Energy, NonpositiveFieldsOnlySeeTheQuadraticPart)
{
  const Fixture1d& s = setup();
  const Field u = random_field(s.d, 4, -2.0, 0.0);
  for (double eps : {0.0, 1e-3, 1.0}) EXPECT_NEAR(energy(s.op, s.spec, eps, u), 0.5 * bilinear(s.op, u, u), 1e-12);
}

TEST(Energy, SmallEpsApproachesUnregularized)
{
  const Fixture1d& s = setup();
  const Field u = random_field(s.d, 8, 0.1, 1.0);
  const double e0 = energy(s.op, s.spec, 0.0, u);
  // The regularized primitive differs from the limit by O(eps^{1-gamma}).
  const double coarse = std::abs(energy(s.op, s.spec, 1e-4, u) - e0);
  const double fine = std::abs(energy(s.op, s.spec, 1e-10, u) - e0);
  const double expected = std::pow(1e-6, 1.0 - s.spec.gamma);
  EXPECT_GT(fine / coarse, 0.5 * expected);
  EXPECT_LT(fine / coarse, 2.0 * expected);
}

TEST(Gradient, AtZeroIsMinusMassLambdaEpsPower)
{
  const Fixture1d& s = setup();
  const Field g = gradient(s.op, s.at(2.0), 0.25, Field(s.d));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], -s.op.mass() * 2.0 * std::pow(0.25, -0.5), 1e-14);
  EXPECT_THROW(gradient(s.op, s.spec, 0.0, Field(s.d)), InvalidArgument);
}

TEST(Gradient, MatchesCentralDifferences)
{
  const Fixture1d& s = setup();
  for (double eps : {1.0, 1e-2, 1e-4}) {
    const GradientCheck c = gradient_check(s.op, s.spec, eps, 20, 17);
    EXPECT_EQ(c.pairs, 20);
    EXPECT_LE(c.max_error, 1e-6) << eps;
  }
}

TEST(Calibration, GeometryIsConsistent)
{
  const Fixture1d& s = setup();
  const MountainPassParams& p = s.params;
  EXPECT_GT(p.R, 0.0);
  EXPECT_GT(p.rho, 0.0);
  EXPECT_GT(p.T, p.R);
  EXPECT_GT(p.Lambda_est, 0.0);
  EXPECT_GT(p.k, 0.0);
  EXPECT_LT(p.k, 1.0);
  EXPECT_NEAR(p.theta, std::pow(2.0, 1.0 - 3.0 / 4.0), 1e-14);
  // The ascent value is a lower bound for the discrete embedding ratio, so
  // any field obeys it only up to that bound; e1 certainly does.
  const Field& e = s.eig.e1;
  double power = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) power += std::pow(e[i], 3.0);
  EXPECT_LE(power * s.op.mass(), p.embedding_C * p.theta * std::pow(h1_seminorm(e), 3.0) * (1 + 1e-10));
  for (double lambda : {p.Lambda_est / 4, p.Lambda_est / 2, p.Lambda_est * 0.99})
    EXPECT_LT(energy(s.op, s.at(lambda), 1.0, Field(s.d, p.T * e.values)), -1.0);
}

TEST(Calibration, RimStaysAboveRhoBelowLambdaEstimate)
{
  const Fixture1d& s = setup();
  for (double eps : {1.0, 1e-4, 0.0}) {
    const RimCheck r = rim_check(s.op, s.spec, eps, s.params, s.params.Lambda_est / 2, 50, 3);
    EXPECT_EQ(r.violations, 0) << eps;
    EXPECT_GE(r.count, 50);
    EXPECT_GE(r.min_energy, s.params.rho);
  }
}

TEST(BallMinimizer, NegativeInteriorNonnegative)
{
  const Fixture1d& s = setup();
  const ProblemSpec spec = s.at(s.params.Lambda_est / 4);
  const BallResult b = ball_minimizer(s.op, spec, 0.01, s.params);
  EXPECT_LT(b.energy, 0.0);
  EXPECT_LT(b.h1, s.params.R);
  EXPECT_GE(b.nu.values.minCoeff(), 0.0);
  EXPECT_LT(b.gradient_norm, 1e-9);
}

TEST(MountainPass, CriticalPointAboveRim)
{
  const Fixture1d& s = setup();
  const ProblemSpec spec = s.at(s.params.Lambda_est / 4);
  const MountainPassResult m = mountain_pass(s.op, spec, 0.01, s.params);
  EXPECT_GE(m.energy, s.params.rho);
  EXPECT_GE(m.zeta.values.minCoeff(), 0.0);
  EXPECT_LT(gradient(s.op, spec, 0.01, m.zeta).values.norm(), 1e-4);
  EXPECT_EQ(m.path.size(), 42u);
  EXPECT_EQ(m.path.front().values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MountainPass, EndpointMustBeLow)
{
  const Fixture1d& s = setup();
  MountainPassParams bad = s.params;
  bad.T = s.params.R * 0.1;
  EXPECT_THROW(mountain_pass(s.op, s.at(0.01), 0.1, bad), InvalidArgument);
}

TEST(SolveG2, TwoSeparatedSolutionsAboveBarrier)
{
  const Fixture1d& s = setup();
  const ProblemSpec spec = s.at(s.params.Lambda_est / 4);
  const TwoSolutions t = solve_g2(s.op, spec, s.params);
  EXPECT_LT(t.energy_nu, 0.0);
  EXPECT_GE(t.energy_zeta, s.params.rho);
  for (const auto& e : t.eps_trace) {
    EXPECT_LT(e.energy_nu, 0.0);
    EXPECT_GE(e.energy_zeta, s.params.rho);
    EXPECT_GE(e.barrier_margin, -1e-9);
    EXPECT_LE(std::max(e.h1_nu, e.h1_zeta), t.Theta);
  }
  EXPECT_GT(t.barrier_min, 0.0);
  EXPECT_GE((t.nu.values - t.barrier.values).minCoeff(), -1e-9);
  EXPECT_GE((t.zeta.values - t.barrier.values).minCoeff(), -1e-9);
  EXPECT_GE(t.distinctness_ratio, 0.5);
  EXPECT_LT(t.residual_nu.max_weak_residual, 1e-8);
  EXPECT_LT(t.residual_zeta.max_weak_residual, 1e-8);

  // Limit consistency and the monitored uniform bound over the last points.
  const std::size_t n = t.eps_trace.size();
  ASSERT_GE(n, 4u);
  for (std::size_t k = n - 2; k < n; ++k) {
    EXPECT_LT(t.limit_gap_nu[k], t.limit_gap_nu[k - 1]);
    EXPECT_LT(t.limit_gap_zeta[k], t.limit_gap_zeta[k - 1]);
    EXPECT_LE(t.eps_trace[k].h1_zeta, 1.1 * t.eps_trace[k - 1].h1_zeta);
  }
}

TEST(SolveG2, RefusesLambdaAboveEstimateUnlessAsked)
{
  const Fixture1d& s = setup();
  EXPECT_THROW(solve_g2(s.op, s.at(2 * s.params.Lambda_est), s.params), SolverFailure);
}

TEST(SolveG2, RejectsSingularHNonlinearity)
{
  const Fixture1d& s = setup();
  EXPECT_THROW(solve_g2(s.op, s.eig, ProblemSpec::with_h(0.5, 0.5, 1.0, h_builtin("one"))), InvalidArgument);
}

TEST(SolveG2, TwoDimensional)
{
  const Domain d = build_domain(2, {{0, 1}, {0, 1}}, {11, 11});
  const MixedOperator op = assemble(d, 0.5);
  const EigenPair eig = principal_eigenpair(op);
  ProblemSpec spec = ProblemSpec::with_power(0.5, 0.5, 1.0, 2.0);
  const MountainPassParams p = calibrate_geometry(op, eig, spec);
  spec.lambda = p.Lambda_est / 4;
  const TwoSolutions t = solve_g2(op, spec, p);
  EXPECT_LT(t.energy_nu, 0.0);
  EXPECT_GE(t.energy_zeta, p.rho);
  EXPECT_GE(t.distinctness_ratio, 0.5);
}
