#include "mixsing/diagnostics.hpp"
#include "mixsing/eigen_solver.hpp"
#include "mixsing/error.hpp"
#include "mixsing/singular_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mixsing;

namespace {

struct Fixture1d {
  Domain d = build_domain(1, {{-1, 1}}, {63});
  MixedOperator op = assemble(d, 0.5);
  EigenPair eig = principal_eigenpair(op);
};

const Fixture1d& setup()
{
  static const Fixture1d s;
  return s;
}

const PureSingularResult& pure_half()
{
  static const PureSingularResult r = solve_pure_singular(setup().op, 0.5);
  return r;
}

}  // namespace

TEST(PureSingular, PositiveSymmetricAndMonotoneInEps)
{
  const PureSingularResult& r = pure_half();
  EXPECT_GT(r.min_interior, 0.0);
  EXPECT_EQ(r.min_interior, r.v0.values.minCoeff());
  EXPECT_LT(symmetry_defect(r.v0), 1e-9);
  EXPECT_LE(r.max_monotonicity_violation, 1e-9);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_GE(r.trace[k].linf, r.trace[k - 1].linf - 1e-12);
  ASSERT_GE(r.trace.size(), 2u);
  EXPECT_LT(r.trace.back().h1_change, 1e-6);
}

TEST(PureSingular, SolvesTheUnregularizedSystem)
{
  const Fixture1d& s = setup();
  const PureSingularResult& r = pure_half();
  const ProblemSpec unit = ProblemSpec::with_h(0.5, 0.5, 1.0, h_builtin("one"));
  EXPECT_LT(nonlinear_residual(s.op, unit.rhs(), r.v0.values).norm(), 1e-9);
  EXPECT_LT(weak_residual(s.op, unit, r.v0, 20, 1).max_weak_residual, 1e-9);
}

TEST(PureSingular, StableUnderRefinement)
{
  std::vector<double> linf;
  for (int n : {63, 127}) linf.push_back(solve_pure_singular(assemble(build_domain(1, {{-1, 1}}, {n}), 0.5), 0.5).linf);
  EXPECT_LT(std::abs(linf[1] - linf[0]) / linf[0], 0.05);
}

TEST(PureSingular, StagnationIsReported)
{
  PureSingularOptions o;
  o.schedule.floor = 0.4;  // two eps values only
  o.tol = 1e-12;
  EXPECT_THROW(solve_pure_singular(setup().op, 0.5, o), SolverFailure);
}

TEST(FindALambda, ClosedFormForConstantH)
{
  const Fixture1d& s = setup();
  const double a = find_a_lambda(s.eig, ProblemSpec::with_h(0.5, 0.5, 1.0, h_builtin("one")));
  EXPECT_GT(a, 0.0);
  EXPECT_LE(a * linf_norm(s.eig.e1), std::pow(s.eig.lambda1, -2.0 / 3.0));
}

TEST(FindALambda, NeverDecreasesWithLambda)
{
  const Fixture1d& s = setup();
  double previous = 0.0;
  for (double lambda = 0.01; lambda < 1e4; lambda *= 2) {
    const double a = find_a_lambda(s.eig, ProblemSpec::with_h(0.5, 0.5, lambda, h_builtin("one-plus-t")));
    EXPECT_GE(a, previous);
    previous = a;
  }
}

TEST(FindALambda, NodewiseRecheck)
{
  const Fixture1d& s = setup();
  const ProblemSpec spec = ProblemSpec::with_h(0.5, 0.5, 1.0, h_builtin("one-plus-t"));
  const double a = find_a_lambda(s.eig, spec);
  for (std::size_t i = 0; i < s.eig.e1.size(); ++i) {
    const double t = a * s.eig.e1[i];
    EXPECT_LE(s.eig.lambda1 * t, std::pow(t, -0.5) * (1 + t));
  }
}

TEST(FindBLambda, ClosedFormForConstantH)
{
  const Fixture1d& s = setup();
  for (double lambda : {0.1, 1.0, 3.0, 10.0, 100.0}) {
    const double b = find_b_lambda(s.op, pure_half().v0, ProblemSpec::with_h(0.5, 0.5, lambda, h_builtin("one")));
    const double expected = std::max(1.0, std::exp2(std::ceil(std::log2(std::pow(lambda, 1.0 / 1.5)))));
    EXPECT_DOUBLE_EQ(b, expected) << lambda;
  }
}

TEST(FindBLambda, NodewiseSupersolutionRecheck)
{
  const Fixture1d& s = setup();
  const ProblemSpec spec = ProblemSpec::with_h(0.5, 0.5, 10.0, h_builtin("one-plus-log"));
  const Field& v0 = pure_half().v0;
  const double b = find_b_lambda(s.op, v0, spec);
  const Eigen::VectorXd lhs = s.op.system() * (b * v0.values);
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    const double t = b * v0.values[i];
    EXPECT_GE(lhs[i], s.op.mass() * 10.0 * std::pow(t, -0.5) * (1 + std::log1p(t)) * (1 - 1e-9));
  }
}

TEST(SolveG1, ScalingIdentityForConstantH)
{
  const Fixture1d& s = setup();
  for (double lambda : {0.1, 10.0}) {
    const ProblemSpec spec = ProblemSpec::with_h(0.5, 0.5, lambda, h_builtin("one"));
    const SandwichCertificate c = solve_g1(s.op, s.eig, spec, pure_half());
    const Eigen::VectorXd scaled = std::pow(lambda, 1.0 / 1.5) * pure_half().v0.values;
    EXPECT_LT((c.solution.values - scaled).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(SolveG1, CertificateInvariants)
{
  const Fixture1d& s = setup();
  for (const char* h : {"one", "one-plus-t", "one-plus-log"}) {
    const ProblemSpec spec = ProblemSpec::with_h(0.5, 0.25, 1.0, h_builtin(h));
    const SandwichCertificate c = solve_g1(s.op, s.eig, spec);
    EXPECT_GT(c.sub.values.minCoeff(), 0.0) << h;
    EXPECT_LE(c.ordering_defect, 1e-10) << h;
    EXPECT_GE(c.min_interior, c.sub.values.minCoeff()) << h;
    EXPECT_LE((c.solution.values - c.sup.values).maxCoeff(), 1e-10) << h;
    EXPECT_LT(c.residual, 1e-9) << h;
    EXPECT_TRUE(std::isfinite(c.energy)) << h;
    EXPECT_EQ(c.energy, g1_energy(s.op, spec, c.solution));
  }
}

TEST(SolveG1, GlobalShiftReachesTheSameSolution)
{
  const Fixture1d& s = setup();
  const ProblemSpec spec = ProblemSpec::with_h(0.5, 0.5, 1.0, h_builtin("one-plus-t"));
  SandwichOptions nodal, global;
  global.nodal_shift = false;
  const SandwichCertificate a = solve_g1(s.op, s.eig, spec, pure_half(), nodal);
  const SandwichCertificate b = solve_g1(s.op, s.eig, spec, pure_half(), global);
  EXPECT_LT((a.solution.values - b.solution.values).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(a.iterations, b.iterations);
}

TEST(SolveG1, RejectsPowerNonlinearity)
{
  const Fixture1d& s = setup();
  EXPECT_THROW(solve_g1(s.op, s.eig, ProblemSpec::with_power(0.5, 0.5, 1.0, 2.0)), InvalidArgument);
}

TEST(HPrimitive, ClosedForms)
{
  for (double g : {0.25, 0.5, 0.75}) {
    for (double t : {0.01, 0.5, 3.0}) {
      EXPECT_NEAR(h_primitive(h_builtin("one"), g, t), std::pow(t, 1 - g) / (1 - g), 1e-12);
      const double exact = std::pow(t, 1 - g) / (1 - g) + std::pow(t, 2 - g) / (2 - g);
      EXPECT_NEAR(h_primitive(h_builtin("one-plus-t"), g, t), exact, 1e-10 * exact);
    }
  }
  EXPECT_EQ(h_primitive(h_builtin("one"), 0.5, 0.0), 0.0);
}

TEST(ProblemSpec, ViolationsListEveryRange)
{
  ProblemSpec p = ProblemSpec::with_power(1.2, 1.5, -1.0, 0.5, 1.0);
  const auto v = p.violations();
  EXPECT_EQ(v.size(), 5u);
  EXPECT_NE(v[1].find("(0,1)"), std::string::npos);
  EXPECT_THROW(p.validate(), InvalidArgument);
  EXPECT_THROW(h_builtin("cubic"), InvalidArgument);
}

TEST(EpsSchedule, GeometricDownToFloor)
{
  const auto v = EpsSchedule{1.0, 0.5, 1e-3}.values();
  ASSERT_EQ(v.size(), 10u);
  EXPECT_DOUBLE_EQ(v.back(), std::ldexp(1.0, -9));
}
