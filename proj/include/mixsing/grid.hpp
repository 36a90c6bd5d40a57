#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace mixsing {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Uniform tensor grid on an interval (dim = 1) or rectangle (dim = 2).
///
/// Only interior nodes carry unknowns; node k on axis a sits at
/// extent[a].lo + k * h[a] for k = 1..n_interior[a]. Everything outside the
/// open box is implicitly zero. Unknowns are ordered lexicographically with
/// axis 0 varying fastest.
class Domain {
public:
  Domain() = default;

  int dim() const { return dim_; }
  const Interval& extent(int axis) const { return extent_[static_cast<std::size_t>(axis)]; }
  int n_interior(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  double h(int axis) const { return h_[static_cast<std::size_t>(axis)]; }

  /// Total number of interior unknowns.
  std::size_t size() const;
  /// Product of mesh widths, the lumped quadrature weight of every node.
  double cell_measure() const;
  /// Lebesgue measure of the box.
  double measure() const;

  /// Multi-index (1-based per axis) of linear index `i`.
  std::array<int, 2> multi_index(std::size_t i) const;
  std::size_t linear_index(int i0, int i1 = 1) const;
  /// Physical coordinates of node `i`; unused axes are 0.
  std::array<double, 2> coordinate(std::size_t i) const;
  /// Index of the node mirrored through the box center along every axis.
  std::size_t mirror(std::size_t i) const;

  friend bool operator==(const Domain&, const Domain&) = default;

private:
  friend Domain build_domain(int dim, const std::vector<Interval>& extent,
                             const std::vector<int>& n_interior);

  int dim_ = 1;
  std::array<Interval, 2> extent_{};
  std::array<int, 2> n_{1, 1};
  std::array<double, 2> h_{1.0, 1.0};
};

/// Throws InvalidArgument for dim outside {1,2}, degenerate intervals, or
/// fewer than three interior nodes on any axis.
Domain build_domain(int dim, const std::vector<Interval>& extent,
                    const std::vector<int>& n_interior);

/// Grid function on interior nodes, zero on the complement of the domain.
struct Field {
  Domain domain;
  Eigen::VectorXd values;

  Field() = default;
  explicit Field(Domain d) : domain(std::move(d)), values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.size()))) {}
  Field(Domain d, Eigen::VectorXd v);

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values[static_cast<Eigen::Index>(i)]; }
};

/// Samples `f(x, y)` at interior nodes.
template <class F>
Field sample(const Domain& domain, F&& f)
{
  Field out(domain);
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const auto x = domain.coordinate(i);
    out[i] = f(x[0], x[1]);
  }
  return out;
}

/// Throws InvalidArgument when the two fields live on different grids.
void require_same_domain(const Domain& a, const Domain& b, const char* where);

/// Second-order finite-difference stiffness scaled by the cell measure, so
/// that f^T A f approximates the integral of |grad f|^2 with zero exterior.
Eigen::SparseMatrix<double> local_stiffness(const Domain& domain);

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
  double h1_semi = 0.0;
};

double l2_norm(const Field& f);
double linf_norm(const Field& f);
/// sqrt(f^T A_loc f).
double h1_seminorm(const Field& f);
Norms norms(const Field& f);

/// Discrete L2 inner product with lumped weights.
double l2_dot(const Field& a, const Field& b);

/// One row per node: x[,y],value. 17 significant digits.
void write_field_csv(std::ostream& os, const Field& f);

}  // namespace mixsing
