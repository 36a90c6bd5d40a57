#pragma once

#include "mixsing/grid.hpp"
#include "mixsing/mixed_operator.hpp"
#include "mixsing/problem.hpp"

#include <cstdint>
#include <vector>

namespace mixsing {

struct ResidualReport {
  double max_weak_residual = 0.0;
  int n_test_fields = 0;
  std::vector<double> refinement_ratios;
  /// max |u_i - u_mirror(i)| of the tested field.
  double symmetry_defect = 0.0;
};

/// Seeded tensor-product C^1 bumps (1 - t^2)^2 with random centers, widths
/// and amplitudes, supported inside the domain.
std::vector<Field> bump_test_fields(const Domain& domain, int count, std::uint64_t seed);

/// max over test fields phi of |B(u, phi) - sum_i g(u_i) phi_i |cell|| / ||grad phi||.
/// Throws InvalidArgument naming the node when g(u_i) is not finite (for
/// singular g this means u_i <= 0).
ResidualReport weak_residual(const MixedOperator& op, const ScalarRhs& g, const Field& u, int n_tests,
                             std::uint64_t seed);
/// Same, with the unregularized nonlinearity of `spec`.
ResidualReport weak_residual(const MixedOperator& op, const ProblemSpec& spec, const Field& u, int n_tests,
                             std::uint64_t seed);

double symmetry_defect(const Field& u);

/// Full symmetric eigensolve of the mass-normalized mixed matrix, ascending.
/// Refuses more than 2000 unknowns.
std::vector<double> dense_eigen_oracle(const MixedOperator& op);

/// Smallest embedding ratio C with gagliardo_energy(f) <= C h1_semi(f)^2, as
/// observed over `count` seeded random fields.
double observed_embedding_constant(const MixedOperator& op, int count, std::uint64_t seed);

/// Weak residual of a coarse solution transferred to a fine reference grid
/// by linear interpolation (1D only). Used for refinement studies.
double transferred_weak_residual(const MixedOperator& fine_op, const ScalarRhs& g, const Field& coarse,
                                 int n_tests, std::uint64_t seed);

/// Piecewise-linear interpolation of a 1D field onto another 1D grid on the
/// same interval, zero outside.
Field interpolate_1d(const Field& coarse, const Domain& fine);

}  // namespace mixsing
