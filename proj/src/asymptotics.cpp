#include "hsl/asymptotics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace hsl {

namespace {

using DR = DomainError::Reason;

struct Point {
  double delta, u, up;  // up = du/dr
};

// Table rows next to `side` with δ in [lo, hi], ordered by increasing δ.
std::vector<Point> boundary_window(const SolutionTable& t, Side side, double lo, double hi) {
  std::vector<Point> out;
  const auto rows = boundary_rows(t, side);
  if (!rows) return out;
  for (Eigen::Index i = rows->first; i <= rows->last; ++i) {
    const double d = t.delta(i);
    if (d >= lo && d <= hi) out.push_back({d, t.u(i), t.u_prime(i)});
  }
  std::sort(out.begin(), out.end(), [](const Point& a, const Point& b) { return a.delta < b.delta; });
  return out;
}

// Least squares y ≈ a + b x; returns (a, b, rms).
struct Line {
  double a, b, rms;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[i];
    b(i) = y[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  const double rms = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
  return {c(0), c(1), rms};
}

double boundary_epsilon(Side side) { return side == Side::Outer ? -1.0 : 1.0; }

}  // namespace

double regime_exponent(const Problem& problem, Regime regime) {
  const auto [bm, bp] = indicial_exponents(problem.mu);
  switch (regime) {
    case Regime::Nonlinear: return 2.0 / (1.0 - problem.p);
    case Regime::LinearSingular: return bm;
    case Regime::LinearRegular: return bp;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

BoundaryFit fit_exponent(const SolutionTable& table, Side side, const WindowPolicy& policy) {
  const double L = table.problem.length();
  BoundaryFit fit;
  fit.side = side;
  fit.delta_hi = policy.delta_hi > 0.0 ? policy.delta_hi : 1e-8 * L;
  fit.delta_lo = fit.delta_hi * std::ldexp(1.0, -policy.octaves);
  const auto pts = boundary_window(table, side, fit.delta_lo, fit.delta_hi);
  fit.samples = static_cast<int>(pts.size());
  if (fit.samples < policy.min_samples)
    throw DataError("fit window [" + std::to_string(fit.delta_lo) + ", " +
                    std::to_string(fit.delta_hi) + "] holds " + std::to_string(fit.samples) +
                    " samples, need " + std::to_string(policy.min_samples));
  const bool all_zero = std::all_of(pts.begin(), pts.end(), [](const Point& p) { return p.u == 0.0; });
  if (all_zero) {
    fit.regime = Regime::DeadCore;
    fit.note = "u vanishes identically on the window";
    return fit;
  }
  if (std::any_of(pts.begin(), pts.end(), [](const Point& p) { return !(p.u > 0.0); }))
    throw DataError("u is not positive on the whole fit window");
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(std::log(p.delta));
    y.push_back(std::log(p.u));
  }
  const Line l = fit_line(x, y);
  fit.exponent = l.b;
  fit.coefficient = std::exp(l.a);
  fit.rms_residual = l.rms;
  return fit;
}

BoundaryFit classify(const Problem& problem, BoundaryFit fit, double tolerance) {
  if (fit.regime == Regime::DeadCore) return fit;
  const auto admissible = admissible_regimes(problem);
  fit.regime = Regime::Unclassified;
  fit.nonexistence_flag = false;
  const Regime candidates[] = {Regime::Nonlinear, Regime::LinearSingular, Regime::LinearRegular};

  // Nearest target overall and nearest admissible target.
  Regime nearest = Regime::Unclassified, nearest_ok = Regime::Unclassified;
  double gap = std::numeric_limits<double>::infinity(), gap_ok = gap;
  for (Regime r : candidates) {
    const double g = std::abs(fit.exponent - regime_exponent(problem, r));
    if (g < gap) gap = g, nearest = r;
    if (admissible.count(r) && g < gap_ok) gap_ok = g, nearest_ok = r;
  }
  if (gap_ok <= tolerance) {
    fit.regime = nearest_ok;
  } else if (gap <= tolerance && !admissible.count(nearest)) {
    fit.nonexistence_flag = true;
    fit.note = "exponent matches the " + to_string(nearest) + " target, which cannot occur here";
  } else {
    fit.note = "exponent between admissible targets";
  }
  // Near-degenerate parameters.
  fit.near_degenerate = false;
  for (Regime a : candidates)
    for (Regime b : candidates)
      if (a < b && admissible.count(a) && admissible.count(b) &&
          std::abs(regime_exponent(problem, a) - regime_exponent(problem, b)) < 4 * tolerance)
        fit.near_degenerate = true;
  return fit;
}

SlopeCheck slope_check(const SolutionTable& table, Side side, Regime regime, double h) {
  const Problem& pb = table.problem;
  if (regime != Regime::LinearSingular && regime != Regime::LinearRegular)
    throw DomainError(DR::Precondition, "slope_check applies to the linear regimes only");
  const double p = pb.p;
  if (regime == Regime::LinearRegular && !(pb.mu > -p / ((1 - p) * (1 - p))))
    throw DomainError(DR::Precondition, "slope relation for the regular regime needs mu > -p/(1-p)^2");
  const BoundaryFit fit = classify(pb, fit_exponent(table, side));
  if (fit.regime != regime)
    throw DomainError(DR::Precondition,
                      "table classifies as " + to_string(fit.regime) + ", not " + to_string(regime));

  const double beta = regime_exponent(pb, regime);
  const double rb = pb.boundary_radius(side);
  const double eps = boundary_epsilon(side);
  if (h <= 0.0) h = 1e-6 * rb;
  const auto pts = boundary_window(table, side, h, 8 * h);
  if (pts.size() < 3) throw DataError("slope_check: fewer than 3 samples in [h, 8h]");

  // Leading correction exponent of v' at 0.
  double gamma = 1.0;
  if (regime == Regime::LinearSingular && beta < 0) gamma = std::min(1.0, -2.0 * beta);
  if (beta > 0) gamma = std::min(1.0, 1.0 + beta * (p - 1.0));

  std::vector<double> dx, v, dg, vd;
  for (const auto& q : pts) {
    const double db = std::pow(q.delta, -beta);
    const double ud = eps * q.up;  // du/dδ
    dx.push_back(q.delta);
    v.push_back(q.u * db);
    dg.push_back(std::pow(q.delta, gamma));
    vd.push_back(db * (ud - beta * q.u / q.delta));
  }
  SlopeCheck out;
  out.side = side;
  out.v0 = fit_line(dx, v).a;
  out.v1 = fit_line(dg, vd).a;
  out.measured_ratio = out.v1 / out.v0;
  out.predicted = -eps * (pb.N - 1) / (2.0 * rb);
  out.abs_error = std::abs(out.measured_ratio - out.predicted);
  return out;
}

double order_alpha_constant(const Problem& problem, double w0) {
  const double bp = indicial_exponents(problem.mu).second;
  const double p = problem.p;
  return std::pow(w0, p) / ((2.0 - bp * (1.0 - p)) * (1.0 + bp * (1.0 + p)));
}

namespace {

// (δ_i, w_i) samples; w0 known (seed) or fitted.
AlphaCheck alpha_fit(const Problem& pb, const std::vector<double>& d, const std::vector<double>& w,
                     std::optional<double> w0) {
  AlphaCheck out;
  const Exponents ex = exponents(pb);
  out.alpha_predicted = ex.order_alpha;
  if (!w0) {
    // Profile the residual of w ≈ a + c δ^α over α.
    auto resid = [&](double alpha, double* a) {
      std::vector<double> x;
      for (double di : d) x.push_back(std::pow(di, alpha));
      const Line l = fit_line(x, w);
      if (a) *a = l.a;
      return l.rms;
    };
    double lo = 0.05, hi = 1.5;
    for (int it = 0; it < 100; ++it) {
      const double m1 = lo + (hi - lo) * 0.382, m2 = lo + (hi - lo) * 0.618;
      if (resid(m1, nullptr) < resid(m2, nullptr))
        hi = m2;
      else
        lo = m1;
    }
    double a = 0.0;
    resid(0.5 * (lo + hi), &a);
    w0 = a;
  }
  out.w0 = *w0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double diff = w[i] - *w0;
    if (diff == 0.0) continue;
    x.push_back(std::log(d[i]));
    y.push_back(std::log(std::abs(diff)));
  }
  if (x.size() < 4) throw DataError("order_alpha_check: w - w0 vanishes on the window");
  const Line l = fit_line(x, y);
  out.alpha_fit = l.b;
  const double sign = w.front() - *w0 < 0 ? -1.0 : 1.0;
  out.limit_const_fit = sign * std::exp(l.a);
  out.const_predicted = order_alpha_constant(pb, *w0);
  return out;
}

void require_regular(const Problem& pb) {
  pb.validate_subcritical();
  if (!nonlinear_window(pb))
    throw DomainError(DR::RegimeNonexistent, "regular regime needs mu > -mu_star");
}

}  // namespace

AlphaCheck order_alpha_check(const Seed& seed) {
  if (seed.kind != SeedKind::RegularBoundary)
    throw DomainError(DR::Precondition, "order_alpha_check needs a regular boundary seed");
  const Problem& pb = seed.problem;
  require_regular(pb);
  const double bp = seed.exponent;
  const double rb = seed.anchor;
  std::vector<double> d, w;
  constexpr int n = 32;
  for (int i = 0; i < n; ++i) {
    const double di = rb * 1e-9 * std::pow(1e3, double(i) / (n - 1));
    if (di > seed.d0) break;
    d.push_back(di);
    w.push_back(seed_to_state(seed, di).u * std::pow(di, -bp));
  }
  return alpha_fit(pb, d, w, seed.coefficient);
}

AlphaCheck order_alpha_check(const SolutionTable& table, Side side) {
  const Problem& pb = table.problem;
  require_regular(pb);
  const BoundaryFit fit = classify(pb, fit_exponent(table, side));
  if (fit.regime != Regime::LinearRegular)
    throw DomainError(DR::Precondition, "table classifies as " + to_string(fit.regime));
  const double rb = pb.boundary_radius(side);
  const double bp = regime_exponent(pb, Regime::LinearRegular);
  const auto pts = boundary_window(table, side, 1e-9 * rb, 1e-6 * rb);
  std::vector<double> d, w;
  for (const auto& q : pts) {
    d.push_back(q.delta);
    w.push_back(q.u * std::pow(q.delta, -bp));
  }
  if (d.size() < 8) throw DataError("order_alpha_check: too few samples in [1e-9, 1e-6]·radius");
  return alpha_fit(pb, d, w, std::nullopt);
}

}  // namespace hsl
