#pragma once

#include "mixsing/grid.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <memory>

namespace mixsing {

struct AssemblyOptions {
  /// When false the fractional stiffness is assembled as exactly zero.
  bool include_fractional = true;
};

/// Discrete -Laplacian + (-Laplacian)^s with exterior-zero Dirichlet data.
///
/// Both matrices are in weak (measure-weighted) form:
///   f^T a_loc f  ~ int_Omega |grad f|^2
///   f^T a_frac f ~ double integral over R^n x R^n of |f(x)-f(y)|^2 / |x-y|^{n+2s}
/// The kernel carries no normalization constant. The strong fractional
/// Laplacian at a node is therefore (a_frac f)_i / (2 * cell_measure).
///
/// The system matrix a_loc + a_frac is factored once at assembly; the
/// object is immutable afterwards and safe to share.
class MixedOperator {
public:
  const Domain& domain() const { return domain_; }
  double s() const { return s_; }
  bool has_fractional() const { return has_fractional_; }

  const Eigen::SparseMatrix<double>& a_loc() const { return a_loc_; }
  const Eigen::MatrixXd& a_frac() const { return a_frac_; }
  /// Weak-form contribution of the kernel tail over the exterior, per node.
  const Eigen::VectorXd& exterior_diag() const { return exterior_diag_; }
  /// Dense a_loc + a_frac.
  const Eigen::MatrixXd& system() const { return system_; }
  /// Lumped mass weight (identical for every node).
  double mass() const { return domain_.cell_measure(); }

  /// (a_loc + a_frac)^{-1} rhs.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// a_loc^{-1} rhs.
  Eigen::VectorXd solve_local(const Eigen::VectorXd& rhs) const;

  /// Same grid, a_frac replaced by zero.
  MixedOperator local_only() const;

private:
  friend MixedOperator assemble(const Domain&, double, const AssemblyOptions&);
  void finalize();

  Domain domain_;
  double s_ = 0.5;
  bool has_fractional_ = true;
  Eigen::SparseMatrix<double> a_loc_;
  Eigen::MatrixXd a_frac_;
  Eigen::VectorXd exterior_diag_;
  Eigen::MatrixXd system_;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> system_llt_;
  std::shared_ptr<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> local_ldlt_;
};

/// Throws InvalidArgument unless 0 < s < 1.
MixedOperator assemble(const Domain& domain, double s, const AssemblyOptions& options = {});

/// (a_loc + a_frac) f.
Field apply_mixed(const MixedOperator& op, const Field& f);
/// f^T (a_loc + a_frac) g.
double bilinear(const MixedOperator& op, const Field& f, const Field& g);
/// f^T a_frac f, tail included.
double gagliardo_energy(const MixedOperator& op, const Field& f);
/// Pointwise P.V. integral of (f(x)-f(y))/|x-y|^{n+2s} at interior nodes,
/// i.e. a_frac f / (2 m): the quadratic form counts each pair twice.
Field fractional_laplacian(const MixedOperator& op, const Field& f);

/// Coordinate-format dump "row col value" (0-based), entries with
/// |value| > drop_below only.
void write_matrix_coo(std::ostream& os, const Eigen::MatrixXd& m, double drop_below = 0.0);

namespace detail {

/// 1D product-quadrature weights in units of h^{-2s}: entry k-1 is the
/// coupling between nodes k apart, for k = 1..count.
Eigen::VectorXd fractional_weights_1d(double s, int count);
/// Sum of the 1D weights for all offsets >= m (m >= 1), units h^{-2s}.
double fractional_tail_1d(double s, int m);

}  // namespace detail

}  // namespace mixsing
