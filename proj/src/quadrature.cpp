#include "hsl/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hsl::quad {

namespace {

GaussLegendre build_rule(int n) {
  GaussLegendre rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Ascending order.
    rule.nodes(n - 1 - i) = x;
    rule.weights(n - 1 - i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const auto& gl = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += gl.weights(i) * f(mid + half * gl.nodes(i));
  return sum * half;
}

double integrate_geometric(const std::function<double(double)>& f, double a, double b, int n) {
  if (!(a > 0.0)) throw std::invalid_argument("integrate_geometric: a must be positive");
  if (b <= a) return b == a ? 0.0 : -integrate_geometric(f, b, a, n);
  double sum = 0.0;
  double lo = a;
  while (lo < b) {
    const double hi = std::min(2.0 * lo, b);
    sum += integrate(f, lo, hi, n);
    lo = hi;
  }
  return sum;
}

double integrate_from_zero(const std::function<double(double)>& f, double b, int levels, int n) {
  if (b == 0.0) return 0.0;
  double lo = b * std::ldexp(1.0, -levels);
  double sum = integrate(f, 0.0, lo, n);
  return sum + integrate_geometric(f, lo, b, n);
}

GradedPanels::GradedPanels(double d0, int panels, int points, double ratio)
    : d0_(d0), panels_(panels), points_(points) {
  if (!(d0 > 0.0) || panels < 1 || points < 2 || !(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("GradedPanels: invalid layout");
  breaks_.resize(panels + 1);
  breaks_(0) = 0.0;
  for (int i = 1; i <= panels; ++i) breaks_(i) = d0 * std::pow(ratio, panels - i);
  const auto& gl = gauss_legendre(points);
  nodes_.resize(panels * points);
  weights_.resize(panels * points);
  for (int i = 0; i < panels; ++i) {
    const double a = breaks_(i), b = breaks_(i + 1);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int j = 0; j < points; ++j) {
      nodes_(i * points + j) = mid + half * gl.nodes(j);
      weights_(i * points + j) = half * gl.weights(j);
    }
  }
}

int GradedPanels::panel_of(double x) const {
  if (x <= breaks_(1)) return 0;
  if (x >= breaks_(panels_ - 1)) return panels_ - 1;
  // Breaks are geometric above the first panel.
  int lo = 1, hi = panels_ - 1;
  while (hi - lo > 1) {
    const int m = (lo + hi) / 2;
    (x < breaks_(m) ? hi : lo) = m;
  }
  return lo;
}

namespace {

// Lagrange basis at x for the nodes of one panel.
void lagrange(const Eigen::VectorXd& nodes, int base, int points, double x, double* out) {
  for (int m = 0; m < points; ++m) {
    double l = 1.0;
    const double xm = nodes(base + m);
    for (int j = 0; j < points; ++j) {
      if (j != m) l *= (x - nodes(base + j)) / (xm - nodes(base + j));
    }
    out[m] = l;
  }
}

}  // namespace

Eigen::RowVectorXd GradedPanels::interpolation_row(double x) const {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(size());
  const int base = panel_of(x) * points_;
  lagrange(nodes_, base, points_, x, row.data() + base);
  return row;
}

Eigen::RowVectorXd GradedPanels::integration_row(double x,
                                                 const std::function<double(double)>& k) const {
  Eigen::VectorXd k_nodes(size());
  const int base = x <= 0.0 ? 0 : panel_of(x) * points_;
  for (int i = points_; i < base; ++i) k_nodes(i) = k(nodes_(i));
  return integration_row(x, k_nodes, k);
}

Eigen::RowVectorXd GradedPanels::integration_row(double x, const Eigen::VectorXd& k_nodes,
                                                 const std::function<double(double)>& k) const {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(size());
  if (x <= 0.0) return row;
  const int panel = panel_of(x);
  const int base = panel * points_;
  std::vector<double> basis(points_);
  if (panel > 0) {
    for (int i = points_; i < base; ++i) row(i) = k_nodes(i) * weights_(i);
    const double a = breaks_(panel);
    const auto& gl = gauss_legendre(points_);
    const double half = 0.5 * (x - a), mid = 0.5 * (x + a);
    for (int l = 0; l < points_; ++l) {
      const double y = mid + half * gl.nodes(l);
      const double wk = half * gl.weights(l) * k(y);
      lagrange(nodes_, base, points_, y, basis.data());
      for (int m = 0; m < points_; ++m) row(base + m) += wk * basis[m];
    }
  }
  // The panel touching 0 carries the kernels' s^γ and s log s behaviour;
  // s = b y³ turns s^γ ds into y^{3γ+2} dy, which Gauss–Legendre resolves.
  const double b = panel > 0 ? breaks_(1) : x;
  const auto& gl = gauss_legendre(3 * points_);
  for (int l = 0; l < gl.nodes.size(); ++l) {
    const double y = 0.5 * (1.0 + gl.nodes(l));
    const double sy = b * y * y * y;
    const double wk = 0.5 * gl.weights(l) * 3.0 * b * y * y * k(sy);
    lagrange(nodes_, 0, points_, sy, basis.data());
    for (int m = 0; m < points_; ++m) row(m) += wk * basis[m];
  }
  return row;
}

Eigen::MatrixXd GradedPanels::volterra_matrix(
    const std::function<double(double, double)>& kernel) const {
  const int n = size();
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = nodes_(i);
    A.row(i) = integration_row(x, [&](double s) { return kernel(s, x); });
  }
  return A;
}

}  // namespace hsl::quad
