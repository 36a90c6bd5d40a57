#include "mixsing/grid.hpp"

#include "mixsing/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace mixsing {

std::size_t Domain::size() const
{
  std::size_t n = static_cast<std::size_t>(n_[0]);
  if (dim_ == 2) n *= static_cast<std::size_t>(n_[1]);
  return n;
}

double Domain::cell_measure() const { return dim_ == 2 ? h_[0] * h_[1] : h_[0]; }

double Domain::measure() const
{
  return dim_ == 2 ? extent_[0].length() * extent_[1].length() : extent_[0].length();
}

std::array<int, 2> Domain::multi_index(std::size_t i) const
{
  const auto n0 = static_cast<std::size_t>(n_[0]);
  return {static_cast<int>(i % n0) + 1, static_cast<int>(i / n0) + 1};
}

std::size_t Domain::linear_index(int i0, int i1) const
{
  return static_cast<std::size_t>(i0 - 1) +
         static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(i1 - 1);
}

std::array<double, 2> Domain::coordinate(std::size_t i) const
{
  const auto k = multi_index(i);
  std::array<double, 2> x{extent_[0].lo + k[0] * h_[0], 0.0};
  if (dim_ == 2) x[1] = extent_[1].lo + k[1] * h_[1];
  return x;
}

std::size_t Domain::mirror(std::size_t i) const
{
  const auto k = multi_index(i);
  const int m0 = n_[0] + 1 - k[0];
  const int m1 = dim_ == 2 ? n_[1] + 1 - k[1] : 1;
  return linear_index(m0, m1);
}

Domain build_domain(int dim, const std::vector<Interval>& extent, const std::vector<int>& n_interior)
{
  if (dim != 1 && dim != 2)
    throw InvalidArgument("build_domain: dim must be 1 or 2, got " + std::to_string(dim));
  if (extent.size() != static_cast<std::size_t>(dim) || n_interior.size() != static_cast<std::size_t>(dim))
    throw InvalidArgument("build_domain: need one interval and one node count per axis");

  Domain d;
  d.dim_ = dim;
  for (int a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const Interval& iv = extent[ua];
    if (!(std::isfinite(iv.lo) && std::isfinite(iv.hi)) || !(iv.hi > iv.lo))
      throw InvalidArgument("build_domain: degenerate interval on axis " + std::to_string(a));
    if (n_interior[ua] < 3)
      throw InvalidArgument("build_domain: need at least 3 interior nodes on axis " + std::to_string(a));
    d.extent_[ua] = iv;
    d.n_[ua] = n_interior[ua];
    d.h_[ua] = iv.length() / (n_interior[ua] + 1);
  }
  if (dim == 1) {
    d.extent_[1] = {0.0, 1.0};
    d.n_[1] = 1;
    d.h_[1] = 1.0;
  }
  return d;
}

Field::Field(Domain d, Eigen::VectorXd v) : domain(std::move(d)), values(std::move(v))
{
  if (static_cast<std::size_t>(values.size()) != domain.size())
    throw InvalidArgument("Field: value count does not match the number of interior nodes");
}

void require_same_domain(const Domain& a, const Domain& b, const char* where)
{
  if (!(a == b)) throw InvalidArgument(std::string(where) + ": fields live on different domains");
}

Eigen::SparseMatrix<double> local_stiffness(const Domain& domain)
{
  const auto n = static_cast<Eigen::Index>(domain.size());
  const double vol = domain.cell_measure();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * (domain.dim() == 2 ? 5 : 3));

  for (std::size_t i = 0; i < domain.size(); ++i) {
    const auto k = domain.multi_index(i);
    const auto row = static_cast<Eigen::Index>(i);
    double diag = 0.0;
    for (int a = 0; a < domain.dim(); ++a) {
      const double c = vol / (domain.h(a) * domain.h(a));
      diag += 2.0 * c;
      for (int step : {-1, 1}) {
        auto nb = k;
        nb[static_cast<std::size_t>(a)] += step;
        if (nb[static_cast<std::size_t>(a)] < 1 || nb[static_cast<std::size_t>(a)] > domain.n_interior(a)) continue;
        t.emplace_back(row, static_cast<Eigen::Index>(domain.linear_index(nb[0], nb[1])), -c);
      }
    }
    t.emplace_back(row, row, diag);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

double l2_norm(const Field& f) { return std::sqrt(f.values.squaredNorm() * f.domain.cell_measure()); }

double linf_norm(const Field& f) { return f.values.size() == 0 ? 0.0 : f.values.cwiseAbs().maxCoeff(); }

double h1_seminorm(const Field& f)
{
  // Edge sum of the five-point (three-point) stencil, zero-padded.
  const Domain& d = f.domain;
  const double vol = d.cell_measure();
  double sum = 0.0;
  for (int a = 0; a < d.dim(); ++a) {
    const double c = vol / (d.h(a) * d.h(a));
    const int n0 = d.n_interior(0);
    const int n1 = d.dim() == 2 ? d.n_interior(1) : 1;
    const int len = d.n_interior(a);
    const int lines = a == 0 ? n1 : n0;
    for (int line = 1; line <= lines; ++line) {
      double prev = 0.0;
      for (int k = 1; k <= len + 1; ++k) {
        double cur = 0.0;
        if (k <= len) cur = a == 0 ? f[d.linear_index(k, line)] : f[d.linear_index(line, k)];
        const double diff = cur - prev;
        sum += c * diff * diff;
        prev = cur;
      }
    }
  }
  return std::sqrt(sum);
}

Norms norms(const Field& f) { return {l2_norm(f), linf_norm(f), h1_seminorm(f)}; }

double l2_dot(const Field& a, const Field& b)
{
  require_same_domain(a.domain, b.domain, "l2_dot");
  return a.values.dot(b.values) * a.domain.cell_measure();
}

void write_field_csv(std::ostream& os, const Field& f)
{
  const Domain& d = f.domain;
  os << (d.dim() == 2 ? "x,y,value\n" : "x,value\n");
  char buf[96];
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.coordinate(i);
    if (d.dim() == 2)
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[0], x[1], f[i]);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[0], f[i]);
    os << buf;
  }
}

}  // namespace mixsing
