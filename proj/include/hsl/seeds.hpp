#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>

#include "hsl/params.hpp"

namespace hsl {

/// Settings for the Picard iteration on graded Gauss–Legendre panels.
/// Zero for contraction_alpha or d0 selects a default for the instance.
struct PicardConfig {
  double contraction_alpha = 0.0;
  double d0 = 0.0;
  double tol = 1e-12;
  int max_iter = 5000;
  int quadrature_points = 16;
  int panels = 40;
  int max_halvings = 8;
};

enum class SeedKind { DeadCoreInterior, DeadCoreBoundary, DeadCoreOrigin, RegularBoundary,
                      SingularBoundary };

std::string to_string(SeedKind kind);
SeedKind seed_kind_from_string(const std::string& s);

/// Truncated local expansion at a boundary for β₋ < 0:
///   u = δ^β (v0 (1 + a δ + η)) + C δ^β₊,
/// with η = K δ² or K δ² |log δ| (β = -1/2).
struct SingularExpansion {
  enum class Case { BetaInMinusHalfZero, BetaEqualMinusHalf, BetaBelowMinusHalf };
  double v0 = 1.0;
  double C = 0.0;
  double A_const = 0.0;
  double K_coeff = 0.0;
  double slope = 0.0;  // a
  Case case_tag = Case::BetaInMinusHalfZero;
};

std::string to_string(SingularExpansion::Case c);

struct SeedCertificate {
  int iterations = 0;
  int halvings = 0;
  double contraction_ratio = 0.0;  // worst ratio past burn-in
  double ratio_bound = 0.0;        // (α+1)/2 · 1.1
  double sup_w = 0.0;
  double M_bound = 0.0;
  double w_at_zero = 0.0;
  double residual_abs = 0.0;  // max |ODE residual| at the check points
  double residual_rel = 0.0;  // same, scaled by the size of the terms
  double last_increment = 0.0;
};

namespace detail {
struct SeedEvaluator;
}

/// A certified local solution near a boundary, the centre, or an interior
/// dead point. The profile is stored on distance nodes d ∈ (0, d0].
struct Seed {
  SeedKind kind = SeedKind::DeadCoreInterior;
  Problem problem;
  double anchor = 0.0;  // radius where d = 0
  int direction = 1;    // r = anchor + direction·d
  std::optional<Side> side;
  double d0 = 0.0;
  double exponent = 0.0;     // leading power of u in d
  double coefficient = 0.0;  // leading coefficient (c, w0 or v0)
  double C = 0.0;            // singular kinds only
  std::optional<SingularExpansion> expansion;

  Eigen::VectorXd d;       // ascending nodes
  Eigen::VectorXd values;  // w (dead-core, regular) or v (singular)
  Eigen::VectorXd u;
  Eigen::VectorXd du_dd;   // derivative of u along d
  SeedCertificate certificate;

  /// Evaluator built at construction; absent after JSON round-tripping, in
  /// which case states are interpolated from the stored profile.
  std::shared_ptr<const detail::SeedEvaluator> evaluator;
};

/// Dead-core profile u = |d|^{2/(1-p)} (c + w(d)) near a point where u = u' = 0.
struct DeadCoreInteriorAt { double R0; };
struct DeadCoreBoundaryAt { Side side; };
struct DeadCoreOriginAt {};
using DeadCoreLocation = std::variant<DeadCoreInteriorAt, DeadCoreBoundaryAt, DeadCoreOriginAt>;

/// At an interior point d is measured in `direction` (+1 outward, -1 inward).
Seed deadcore_seed(const Problem& problem, const DeadCoreLocation& location,
                   const PicardConfig& config = {}, int direction = +1);

/// u = δ^β₊ w(δ), w(0) = w0.
Seed regular_seed(const Problem& problem, Side side, double w0, const PicardConfig& config = {});

/// u = δ^β₋ v(δ), v(0) = v0, one-parameter family indexed by C.
Seed singular_seed(const Problem& problem, Side side, double v0, double C,
                   const PicardConfig& config = {});

struct RadialState {
  double r;
  double u;
  double u_prime;  // du/dr
};

/// u and du/dr at distance d from the seed's anchor, 0 < d ≤ d0
/// (d = 0 is accepted for dead-core kinds).
RadialState seed_to_state(const Seed& seed, double d);

/// Default validity radius: 1/20 of the smallest geometric length.
double default_d0(const Problem& problem);

}  // namespace hsl
