#include "mixsing/diagnostics.hpp"
#include "mixsing/eigen_solver.hpp"
#include "mixsing/mixed_operator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mixsing;

TEST(PrincipalEigenpair, LocalClosedForm)
{
  for (int n : {31, 199}) {
    const Domain d = build_domain(1, {{0, 1}}, {n});
    const EigenPair e = principal_eigenpair(assemble(d, 0.5, {.include_fractional = false}));
    const double h = d.h(0);
    const double exact = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
    EXPECT_NEAR(e.lambda1, exact, 1e-12 * exact);
    if (n == 199) EXPECT_NEAR(e.lambda1, 9.8695, 1e-3);
  }
}

TEST(PrincipalEigenpair, MixedDominatesLocal)
{
  for (const Domain& d : {build_domain(1, {{-1, 1}}, {63}), build_domain(2, {{0, 1}, {0, 1}}, {9, 9})}) {
    for (double s : {0.2, 0.8}) {
      const MixedOperator op = assemble(d, s);
      EXPECT_GE(principal_eigenpair(op).lambda1, principal_eigenpair(op.local_only()).lambda1);
    }
  }
}

TEST(PrincipalEigenpair, MatchesDenseOracle)
{
  const Domain d = build_domain(1, {{-1, 1}}, {127});
  const MixedOperator op = assemble(d, 0.5);
  const EigenPair e = principal_eigenpair(op);
  const double dense = dense_eigen_oracle(op).front();
  EXPECT_NEAR(e.lambda1, dense, 1e-10 * dense);
}

TEST(PrincipalEigenpair, NormalizedPositiveAndResidualSmall)
{
  const Domain d = build_domain(2, {{0, 2}, {0, 1}}, {11, 7});
  const MixedOperator op = assemble(d, 0.5);
  const EigenPair e = principal_eigenpair(op);
  EXPECT_GT(e.lambda1, 0.0);
  EXPECT_NEAR(l2_norm(e.e1), 1.0, 1e-12);
  EXPECT_GT(e.min_interior, 0.0);
  EXPECT_EQ(e.min_interior, e.e1.values.minCoeff());
  const double rel = e.residual / (e.lambda1 * op.mass() * e.e1.values.norm());
  EXPECT_LT(rel, 1e-10);
  const double rayleigh = bilinear(op, e.e1, e.e1) / std::pow(l2_norm(e.e1), 2);
  EXPECT_NEAR(rayleigh, e.lambda1, 1e-12 * e.lambda1);
  EXPECT_TRUE(e.simple);
  EXPECT_GT(e.lambda2_estimate, e.lambda1 * (1 + 1e-6));
}

TEST(PrincipalEigenpair, DecreasesOnLargerDomain)
{
  // Same mesh width, nested intervals.
  const double small = principal_eigenpair(assemble(build_domain(1, {{-1, 1}}, {63}), 0.5)).lambda1;
  const double large = principal_eigenpair(assemble(build_domain(1, {{-2, 2}}, {127}), 0.5)).lambda1;
  EXPECT_LT(large, small);
}

TEST(PrincipalEigenpair, SymmetricOnSymmetricDomain)
{
  const EigenPair e = principal_eigenpair(assemble(build_domain(1, {{-1, 1}}, {101}), 0.5));
  EXPECT_LT(symmetry_defect(e.e1), 1e-8);
}
