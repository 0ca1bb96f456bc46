#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "hsl/hardy.hpp"
#include "hsl/params.hpp"
#include "hsl/radial_ode.hpp"
#include "hsl/seeds.hpp"

namespace hsl {

/// What the barrier checks know about the distance function: inside the
/// collar δ < rho0 it is smooth, |∇δ| = 1 and Δδ lies in laplacian_bounds(δ).
struct DistanceModel {
  double rho0 = 1.0;
  double curvature_bound = 0.0;
  int N = 2;

  /// [-(N-1)/(rho0-δ), (N-1)/(rho0+δ)]
  std::pair<double, double> laplacian_bounds(double delta) const;
};

/// Collar of a ball (rho0 = R) or an annulus (rho0 = min(r0, (R-r0)/2)).
DistanceModel distance_model(const Problem& problem);

struct UpperPosMu {
  double M, epsilon, rho, delta_bar, cap_value;
};
struct LowerPosMu {
  double M, epsilon_low, rho_low;
};
struct UpperNegMu {
  double M, sigma_bar;
};
struct LowerNegMu {
  double sigma_low;
};
/// Dead-core upper barrier: collar profile (scaled by m) up to rho_tilde,
/// the zero-data comparison solution up to rho, zero beyond.
struct UpperDeadCore {
  double rho, rho_tilde, m;
};
using BarrierKind = std::variant<UpperPosMu, LowerPosMu, UpperNegMu, LowerNegMu, UpperDeadCore>;

bool is_upper(const BarrierKind& kind);
std::string kind_name(const BarrierKind& kind);

/// A barrier as a function of the distance δ, with the samples used to verify it.
struct BarrierProfile {
  BarrierKind kind = LowerNegMu{0.0};
  Eigen::VectorXd delta, values;
  double verified_margin = 0.0;
  std::function<double(double)> eval;  // absent after deserialization

  bool upper() const { return is_upper(kind); }
  double operator()(double d) const;  // falls back to the stored samples
};

struct BarrierPair {
  BarrierProfile lower, upper;
};

/// Zero selects the automatic choice; ε and ε̲ given explicitly are checked
/// against their windows.
struct PositiveMuParams {
  double M = 0.0, epsilon = 0.0, rho = 0.0, epsilon_low = 0.0, rho_low = 0.0;
};

struct NegativeMuParams {
  double M = 1.0, sigma_bar = 0.0, sigma_low = 0.0;  // 0: rho0/2, rho0/4
  PicardConfig seeds;
};

constexpr int kBarrierSamples = 512;
constexpr int kMaxShrinks = 16;

BarrierPair build_barriers_positive_mu(const Problem& problem, const DistanceModel& dm,
                                       const PositiveMuParams& params = {});

BarrierPair build_barriers_negative_mu(const Problem& problem, const DistanceModel& dm,
                                       const NegativeMuParams& params = {});

/// Vanishes for δ >= rho; `base` supplies the collar profile (its upper member).
BarrierProfile build_deadcore_upper(const Problem& problem, const DistanceModel& dm,
                                    const BarrierPair& base, double rho,
                                    const PicardConfig& seeds = {});

/// Log-graded sample distances in [1e-8, 0.95]·rho0.
Eigen::VectorXd barrier_samples(const DistanceModel& dm, int samples = kBarrierSamples);

/// Minimum over the samples of -(Δu + μu/δ² - u^p) for upper barriers and of
/// +(...) for lower ones, Δu taken with the adverse Δδ bound.
double verify_barrier(const BarrierProfile& profile, const Problem& problem,
                      const DistanceModel& dm, int samples = kBarrierSamples);

/// Radial mesh for the monotone iteration: geometric in δ from delta_min to
/// half the gap (annulus) or to the centre (ball), r ascending.
Mesh1D iteration_mesh(const Problem& problem, int n = 2048, double delta_min = 0.0);

struct IterationOptions {
  int max_sweeps = 200;
  double tol = 1e-12;  // on max |u_{k+1} - u_k| / max u
};

struct IterationResult {
  SolutionTable table;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> increments;  // per sweep, relative
  double residual = 0.0;           // max δ²|Δ_h u + μu/δ² - u^p| over interior nodes
  double max_u = 0.0;
  bool sandwiched = true;      // U̲ <= u <= Ū at every node (roundoff only)
  double barrier_defect = 0.0;  // largest relative excursion outside the barriers
};

IterationResult monotone_iteration(const Problem& problem, const BarrierPair& pair,
                                   const Mesh1D& mesh, const IterationOptions& options = {});

}  // namespace hsl
