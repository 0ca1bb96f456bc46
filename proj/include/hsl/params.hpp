#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>

#include "hsl/errors.hpp"

namespace hsl {

struct Ball {
  double R = 1.0;
};

struct Annulus {
  double r0 = 0.5;
  double R = 1.0;
};

using Geometry = std::variant<Ball, Annulus>;

enum class Side { Inner, Outer };

enum class Regime { Nonlinear, LinearSingular, LinearRegular, DeadCore, Unclassified };

std::string to_string(Side side);
std::string to_string(Regime regime);
Side side_from_string(const std::string& s);
Regime regime_from_string(const std::string& s);

/// One instance of  Δu + μ/δ² u = u^p  on a ball or annulus.
struct Problem {
  double mu = 0.1;
  double p = 0.5;
  int N = 2;
  Geometry geometry = Ball{};

  /// Throws DomainError unless mu != 0, 0 < p < 1, N >= 1 and the geometry is valid.
  void validate() const;
  /// validate() plus mu < 1/4.
  void validate_subcritical() const;

  bool is_ball() const { return std::holds_alternative<Ball>(geometry); }
  double outer_radius() const;
  /// 0 for a ball.
  double inner_radius() const;
  /// R for a ball, R - r0 for an annulus.
  double length() const;
  /// Distance to the boundary at radius r.
  double distance(double r) const;
  /// Radius of the boundary component on `side`; throws for Inner on a ball.
  double boundary_radius(Side side) const;
};

struct Exponents {
  double beta_minus;
  double beta_plus;
  double mu_star;
  double nonlinear_exp;  // 2/(1-p)
  double order_alpha;    // min{1, 2 - beta_plus (1-p)}
};

/// Coefficients c of the dead-core profiles u = c d^{2/(1-p)} (1 + o(1)).
struct DeadCoreCoefficients {
  double c_p;                        // interior point
  std::optional<double> c_boundary;  // boundary point, defined iff mu > -mu_star
  std::optional<double> c_origin;    // ball centre
};

/// Roots of β(β-1) + μ = 0, ordered (β₋, β₊). Throws for mu > 1/4.
std::pair<double, double> indicial_exponents(double mu);

/// μ* = 2(p+1)/(1-p)².
double mu_star(double p);

Exponents exponents(const Problem& problem);

DeadCoreCoefficients deadcore_coefficients(const Problem& problem);

/// Leading-order balance c·base - c^p of u = c d^{2/(1-p)} substituted into
/// the local equation with linear coefficient `base` (μ*, μ*+μ, ...).
/// Zero exactly at the dead-core coefficient.
double deadcore_balance(double c, double base, double p);

/// c solving deadcore_balance(c, base, p) = 0, i.e. base^{1/(p-1)}.
double deadcore_coefficient(double base, double p);

/// Boundary regimes that can occur for this (μ, p).
std::set<Regime> admissible_regimes(const Problem& problem);

/// Whether the nonlinear and linear-regular regimes exist (μ > -μ*, strict).
bool nonlinear_window(const Problem& problem);

}  // namespace hsl
