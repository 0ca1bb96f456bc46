#include "hsl/params.hpp"

#include <cmath>

namespace hsl {

std::string to_string(Side side) { return side == Side::Inner ? "inner" : "outer"; }

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Nonlinear: return "Nonlinear";
    case Regime::LinearSingular: return "LinearSingular";
    case Regime::LinearRegular: return "LinearRegular";
    case Regime::DeadCore: return "DeadCore";
    case Regime::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

Side side_from_string(const std::string& s) {
  if (s == "inner") return Side::Inner;
  if (s == "outer") return Side::Outer;
  throw DomainError(DomainError::Reason::ParameterOutOfRange, "unknown side '" + s + "'");
}

Regime regime_from_string(const std::string& s) {
  for (Regime r : {Regime::Nonlinear, Regime::LinearSingular, Regime::LinearRegular,
                   Regime::DeadCore, Regime::Unclassified}) {
    if (to_string(r) == s) return r;
  }
  throw DomainError(DomainError::Reason::ParameterOutOfRange, "unknown regime '" + s + "'");
}

void Problem::validate() const {
  using R = DomainError::Reason;
  if (!std::isfinite(mu)) throw DomainError(R::ParameterOutOfRange, "mu must be finite");
  if (mu == 0.0) throw DomainError(R::MuZero, "mu = 0 is excluded");
  if (!(p > 0.0 && p < 1.0)) throw DomainError(R::ParameterOutOfRange, "p must lie in (0,1)");
  if (N < 1) throw DomainError(R::ParameterOutOfRange, "N must be >= 1");
  if (const auto* b = std::get_if<Ball>(&geometry)) {
    if (!(b->R > 0.0)) throw DomainError(R::ParameterOutOfRange, "ball radius must be positive");
  } else {
    const auto& a = std::get<Annulus>(geometry);
    if (!(a.r0 > 0.0 && a.r0 < a.R))
      throw DomainError(R::ParameterOutOfRange, "annulus needs 0 < r0 < R");
  }
}

void Problem::validate_subcritical() const {
  validate();
  if (mu == 0.25) throw DomainError(DomainError::Reason::MuQuarter, "mu = 1/4 is not supported");
  if (mu > 0.25)
    throw DomainError(DomainError::Reason::NoPositiveHarmonics,
                      "mu > 1/4: no positive harmonics exist");
}

double Problem::outer_radius() const {
  return std::visit([](const auto& g) { return g.R; }, geometry);
}

double Problem::inner_radius() const {
  if (const auto* a = std::get_if<Annulus>(&geometry)) return a->r0;
  return 0.0;
}

double Problem::length() const { return outer_radius() - inner_radius(); }

double Problem::distance(double r) const {
  const double R = outer_radius();
  if (is_ball()) return R - r;
  const double r0 = inner_radius();
  return std::min(r - r0, R - r);
}

double Problem::boundary_radius(Side side) const {
  if (side == Side::Outer) return outer_radius();
  if (is_ball())
    throw DomainError(DomainError::Reason::Precondition, "a ball has no inner boundary");
  return inner_radius();
}

std::pair<double, double> indicial_exponents(double mu) {
  if (mu > 0.25)
    throw DomainError(DomainError::Reason::NoPositiveHarmonics,
                      "mu > 1/4: no positive harmonics exist");
  const double root = std::sqrt(0.25 - mu);
  return {0.5 - root, 0.5 + root};
}

double mu_star(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError(DomainError::Reason::ParameterOutOfRange, "p must lie in (0,1)");
  return 2.0 * (p + 1.0) / ((1.0 - p) * (1.0 - p));
}

Exponents exponents(const Problem& problem) {
  const auto [bm, bp] = indicial_exponents(problem.mu);
  const double p = problem.p;
  return Exponents{bm, bp, mu_star(p), 2.0 / (1.0 - p), std::min(1.0, 2.0 - bp * (1.0 - p))};
}

double deadcore_balance(double c, double base, double p) { return c * base - std::pow(c, p); }

double deadcore_coefficient(double base, double p) {
  if (!(base > 0.0))
    throw DomainError(DomainError::Reason::RegimeNonexistent,
                      "nonlinear boundary regime nonexistent (balance coefficient <= 0)");
  return std::pow(base, 1.0 / (p - 1.0));
}

bool nonlinear_window(const Problem& problem) { return problem.mu > -mu_star(problem.p); }

DeadCoreCoefficients deadcore_coefficients(const Problem& problem) {
  problem.validate();
  const double p = problem.p;
  const double ms = mu_star(p);
  DeadCoreCoefficients out{deadcore_coefficient(ms, p), std::nullopt, std::nullopt};
  if (nonlinear_window(problem)) out.c_boundary = deadcore_coefficient(ms + problem.mu, p);
  if (problem.is_ball())
    out.c_origin = deadcore_coefficient(ms + 2.0 * (problem.N - 1) / (1.0 - p), p);
  return out;
}

std::set<Regime> admissible_regimes(const Problem& problem) {
  problem.validate_subcritical();
  std::set<Regime> out{Regime::LinearSingular, Regime::DeadCore};
  if (nonlinear_window(problem)) {
    out.insert(Regime::LinearRegular);
    out.insert(Regime::Nonlinear);
  }
  return out;
}

}  // namespace hsl
