#pragma once

#include <string>

#include "hsl/params.hpp"
#include "hsl/radial_ode.hpp"
#include "hsl/seeds.hpp"

namespace hsl {

/// Dyadic fitting window [δ_hi / 2^octaves, δ_hi].
struct WindowPolicy {
  double delta_hi = 0.0;  // 0: 1e-8 · length
  int octaves = 10;
  int min_samples = 16;
};

struct BoundaryFit {
  Side side = Side::Outer;
  double exponent = 0.0;
  double coefficient = 0.0;  // u ≈ coefficient · δ^exponent
  double delta_lo = 0.0, delta_hi = 0.0;
  double rms_residual = 0.0;  // log–log
  int samples = 0;
  Regime regime = Regime::Unclassified;
  bool nonexistence_flag = false;  // nearest target is an inadmissible regime
  bool near_degenerate = false;    // admissible targets closer than 4·tolerance
  std::string note;
};

constexpr double kClassTolerance = 0.02;

BoundaryFit fit_exponent(const SolutionTable& table, Side side, const WindowPolicy& policy = {});

BoundaryFit classify(const Problem& problem, BoundaryFit fit, double tolerance = kClassTolerance);

/// Target exponent of a regime (2/(1-p), β₋ or β₊).
double regime_exponent(const Problem& problem, Regime regime);

struct SlopeCheck {
  Side side = Side::Outer;
  double v0 = 0.0;
  double v1 = 0.0;
  double measured_ratio = 0.0;  // v'(0)/v(0)
  double predicted = 0.0;       // ±(N-1)/(2·radius)
  double abs_error = 0.0;
};

/// v = u δ^{-β} with β = β₋ (LinearSingular) or β₊ (LinearRegular).
/// `h` is the inner end of the sampling window [h, 8h] (0: 1e-6 · radius).
SlopeCheck slope_check(const SolutionTable& table, Side side, Regime regime, double h = 0.0);

struct AlphaCheck {
  double alpha_fit = 0.0;
  double limit_const_fit = 0.0;
  double w0 = 0.0;
  double alpha_predicted = 0.0;
  double const_predicted = 0.0;  // meaningful when alpha_predicted < 1
};

/// Fits w(δ) - w(0) ~ c δ^α over δ ∈ [1e-9, 1e-6] · radius.
AlphaCheck order_alpha_check(const Seed& seed);
AlphaCheck order_alpha_check(const SolutionTable& table, Side side);

/// Limit constant of (w - w0)/δ^α for α < 1.
double order_alpha_constant(const Problem& problem, double w0);

}  // namespace hsl
