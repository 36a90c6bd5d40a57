#include "mixsing/mixed_operator.hpp"

#include "mixsing/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

namespace mixsing {

namespace {

/// (b^p - a^p) / p, stable for p -> 0 and b close to a.
double power_difference(double a, double b, double p)
{
  const double log_ratio = std::log(b / a);
  if (std::abs(p) < 1e-14) return log_ratio;
  return std::pow(a, p) * std::expm1(p * log_ratio) / p;
}

/// int_a^b t^{-2s} dt
double kernel_moment1(double a, double b, double s) { return power_difference(a, b, 1.0 - 2.0 * s); }
/// int_a^b t^{-1-2s} dt
double kernel_moment0(double a, double b, double s) { return power_difference(a, b, -2.0 * s); }

/// int_a^{a+1} (t - a) t^{-1-2s} dt
double rising_ramp(double a, double s) { return kernel_moment1(a, a + 1.0, s) - a * kernel_moment0(a, a + 1.0, s); }
/// int_a^{a+1} (a + 1 - t) t^{-1-2s} dt
double falling_ramp(double a, double s) { return (a + 1.0) * kernel_moment0(a, a + 1.0, s) - kernel_moment1(a, a + 1.0, s); }

// Near field |t| < h: second-order Taylor subtraction, u'' by central difference.
double near_field_1d(double s) { return 1.0 / (2.0 - 2.0 * s); }

void assemble_fractional_1d(const Domain& d, double s, Eigen::MatrixXd& a_frac, Eigen::VectorXd& exterior)
{
  const int n = d.n_interior(0);
  const double h = d.h(0);
  const double scale = 2.0 * d.cell_measure() * std::pow(h, -2.0 * s);
  const Eigen::VectorXd w = detail::fractional_weights_1d(s, n);
  const double diag = 2.0 * detail::fractional_tail_1d(s, 1);

  a_frac.resize(n, n);
  exterior.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      a_frac(i, j) = i == j ? scale * diag : -scale * w[std::abs(i - j) - 1];
    // Nodes 0 and n+1 and everything beyond are exterior.
    exterior[i] = scale * (detail::fractional_tail_1d(s, i + 1) + detail::fractional_tail_1d(s, n - i));
  }
}

template <int Points, class F>
double gauss_2d(F&& f, double x0, double x1, double y0, double y1)
{
  using Rule = boost::math::quadrature::gauss<double, Points>;
  return Rule::integrate([&](double x) { return Rule::integrate([&](double y) { return f(x, y); }, y0, y1); }, x0, x1);
}

void assemble_fractional_2d(const Domain& d, double s, Eigen::MatrixXd& a_frac, Eigen::VectorXd& exterior)
{
  const int n0 = d.n_interior(0);
  const int n1 = d.n_interior(1);
  const double hx = d.h(0);
  const double hy = d.h(1);
  const double kernel_exp = -(2.0 + 2.0 * s) / 2.0;  // on |z|^2
  auto kernel = [&](double x, double y) { return std::pow(x * x + y * y, kernel_exp); };

  // Polar integrals over the center cell C and its complement. rho(theta)
  // is the distance to the cell boundary, split at the cell's corner.
  using Angular = boost::math::quadrature::gauss<double, 40>;
  const double corner = std::atan2(hy, hx);
  const double ax = 0.5 * hx;
  const double ay = 0.5 * hy;
  auto polar = [&](auto&& g) {
    const double lo = Angular::integrate([&](double t) { return g(t, ax / std::cos(t)); }, 0.0, corner);
    const double hi = Angular::integrate([&](double t) { return g(t, ay / std::sin(t)); }, corner, 0.5 * std::numbers::pi);
    return 4.0 * (lo + hi);
  };
  const double p = 2.0 - 2.0 * s;
  const double moment_x = polar([&](double t, double r) { return std::cos(t) * std::cos(t) * std::pow(r, p) / p; });
  const double moment_y = polar([&](double t, double r) { return std::sin(t) * std::sin(t) * std::pow(r, p) / p; });
  const double outside = polar([&](double, double r) { return std::pow(r, -2.0 * s) / (2.0 * s); });

  const double near_x = moment_x / (2.0 * hx * hx);
  const double near_y = moment_y / (2.0 * hy * hy);
  const double total = outside + 2.0 * near_x + 2.0 * near_y;

  // Translation-invariant offsets (k0, k1) with |k0| < n0, |k1| < n1; by
  // symmetry only the first quadrant is integrated.
  Eigen::MatrixXd w(n0, n1);
  for (int k0 = 0; k0 < n0; ++k0) {
    for (int k1 = 0; k1 < n1; ++k1) {
      if (k0 == 0 && k1 == 0) {
        w(0, 0) = 0.0;
        continue;
      }
      const double x0 = (k0 - 0.5) * hx, x1 = (k0 + 0.5) * hx;
      const double y0 = (k1 - 0.5) * hy, y1 = (k1 + 0.5) * hy;
      const int reach = std::max(k0, k1);
      double v;
      if (reach <= 2)
        v = gauss_2d<20>(kernel, x0, x1, y0, y1);
      else if (reach <= 8)
        v = gauss_2d<10>(kernel, x0, x1, y0, y1);
      else
        v = gauss_2d<7>(kernel, x0, x1, y0, y1);
      if (k0 == 1 && k1 == 0) v += near_x;
      if (k0 == 0 && k1 == 1) v += near_y;
      w(k0, k1) = v;
    }
  }

  const auto n = static_cast<Eigen::Index>(d.size());
  const double scale = 2.0 * d.cell_measure();
  a_frac.resize(n, n);
  exterior.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ki = d.multi_index(static_cast<std::size_t>(i));
    double interior_sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto kj = d.multi_index(static_cast<std::size_t>(j));
      const double wij = w(std::abs(ki[0] - kj[0]), std::abs(ki[1] - kj[1]));
      a_frac(i, j) = -scale * wij;
      interior_sum += wij;
    }
    a_frac(i, i) = scale * total;
    exterior[i] = scale * (total - interior_sum);
  }
}

}  // namespace

namespace detail {

Eigen::VectorXd fractional_weights_1d(double s, int count)
{
  Eigen::VectorXd w(count);
  for (int k = 1; k <= count; ++k) {
    // Hat function centered at k restricted to t >= 1.
    w[k - 1] = k == 1 ? falling_ramp(1.0, s) + near_field_1d(s) : rising_ramp(k - 1.0, s) + falling_ramp(k, s);
  }
  return w;
}

double fractional_tail_1d(double s, int m)
{
  if (m <= 1) return 1.0 / (2.0 * s) + near_field_1d(s);
  const double a = m - 1.0;
  return rising_ramp(a, s) + std::pow(static_cast<double>(m), -2.0 * s) / (2.0 * s);
}

}  // namespace detail

MixedOperator assemble(const Domain& domain, double s, const AssemblyOptions& options)
{
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("assemble: s must lie in (0,1), got " + std::to_string(s));

  MixedOperator op;
  op.domain_ = domain;
  op.s_ = s;
  op.has_fractional_ = options.include_fractional;
  op.a_loc_ = local_stiffness(domain);

  const auto n = static_cast<Eigen::Index>(domain.size());
  if (options.include_fractional) {
    if (domain.dim() == 1)
      assemble_fractional_1d(domain, s, op.a_frac_, op.exterior_diag_);
    else
      assemble_fractional_2d(domain, s, op.a_frac_, op.exterior_diag_);
    op.a_frac_ = 0.5 * (op.a_frac_ + op.a_frac_.transpose()).eval();
  } else {
    op.a_frac_ = Eigen::MatrixXd::Zero(n, n);
    op.exterior_diag_ = Eigen::VectorXd::Zero(n);
  }
  op.finalize();
  return op;
}

void MixedOperator::finalize()
{
  system_ = a_frac_;
  system_ += Eigen::MatrixXd(a_loc_);
  system_llt_ = std::make_shared<const Eigen::LLT<Eigen::MatrixXd>>(system_);
  if (system_llt_->info() != Eigen::Success)
    throw SolverFailure("assemble", "mixed system matrix is not positive definite");
  local_ldlt_ = std::make_shared<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(a_loc_);
}

MixedOperator MixedOperator::local_only() const
{
  MixedOperator op = *this;
  op.has_fractional_ = false;
  op.a_frac_.setZero();
  op.exterior_diag_.setZero();
  op.finalize();
  return op;
}

Eigen::VectorXd MixedOperator::solve(const Eigen::VectorXd& rhs) const { return system_llt_->solve(rhs); }

Eigen::VectorXd MixedOperator::solve_local(const Eigen::VectorXd& rhs) const { return local_ldlt_->solve(rhs); }

Field apply_mixed(const MixedOperator& op, const Field& f)
{
  require_same_domain(op.domain(), f.domain, "apply_mixed");
  return Field(f.domain, op.system() * f.values);
}

double bilinear(const MixedOperator& op, const Field& f, const Field& g)
{
  require_same_domain(op.domain(), f.domain, "bilinear");
  require_same_domain(op.domain(), g.domain, "bilinear");
  return f.values.dot(op.system() * g.values);
}

double gagliardo_energy(const MixedOperator& op, const Field& f)
{
  require_same_domain(op.domain(), f.domain, "gagliardo_energy");
  return f.values.dot(op.a_frac() * f.values);
}

Field fractional_laplacian(const MixedOperator& op, const Field& f)
{
  require_same_domain(op.domain(), f.domain, "fractional_laplacian");
  return Field(f.domain, (op.a_frac() * f.values) / (2.0 * op.mass()));
}

void write_matrix_coo(std::ostream& os, const Eigen::MatrixXd& m, double drop_below)
{
  char buf[96];
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (std::abs(v) <= drop_below) continue;
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(i), static_cast<long>(j), v);
      os << buf;
    }
}

}  // namespace mixsing
