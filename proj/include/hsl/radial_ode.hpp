#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "hsl/params.hpp"
#include "hsl/seeds.hpp"

namespace hsl {

enum class EventKind { Vanished, ReachedBoundary, ReachedCenter, DeadCoreInterval, StepFailure };

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct Event {
  EventKind kind = EventKind::ReachedBoundary;
  double location = 0.0;  // radius
  double a = 0.0, b = 0.0;  // DeadCoreInterval only
  std::string detail;
};

/// Samples of a radial solution, r strictly increasing, u >= 0.
struct SolutionTable {
  Problem problem;
  Eigen::VectorXd r, u, u_prime;
  /// Distance to the boundary, kept exactly (r loses it near δ = 0).
  Eigen::VectorXd delta;
  std::vector<Event> events;

  Eigen::Index size() const { return r.size(); }
  bool has_event(EventKind kind) const;
  const Event* find_event(EventKind kind) const;
};

enum class Direction { Inward, Outward };

struct IntegrationOptions {
  double rtol = 1e-10;
  /// Switch to the v = u δ^{-β₋} variable below this distance (0: 0.05·length).
  double delta_switch = 0.0;
  /// Stop at this distance to the boundary (0: 1e-12·length).
  double delta_min = 0.0;
  /// Stop inward branches in a ball at this radius (0: 1e-6·R).
  double r_min = 0.0;
  int max_steps = 1000000;
};

struct StartState {
  double r;
  double u;
  double u_prime;
};

SolutionTable integrate(const Problem& problem, const StartState& start, Direction direction,
                        const IntegrationOptions& options = {});

/// Rows of the table that were produced near `side` in the v variable.
struct BoundaryFitHandle {
  Side side = Side::Outer;
  Eigen::Index first = 0;  // index range [first, last]
  Eigen::Index last = 0;
};

struct ShootResult {
  SolutionTable table;
  std::optional<BoundaryFitHandle> boundary;
  double series_radius = 0.0;
  double richardson_error = 0.0;  // series vs. integration from half the radius
};

/// u(0) = u0, u'(0) = 0, started from the centre series.
ShootResult shoot_from_center(const Problem& problem, double u0,
                              const IntegrationOptions& options = {});

/// Solution vanishing identically on [a, b], continued from dead-core seeds.
SolutionTable assemble_with_deadcore(const Problem& problem, double a, double b,
                                     const PicardConfig& config = {},
                                     const IntegrationOptions& options = {});

/// Seed samples on (0, d0] followed by integration away from the anchor.
SolutionTable solve_from_seed(const Seed& seed, const IntegrationOptions& options = {});

/// Rows of `table` adjacent to `side` with δ decreasing toward the boundary.
std::optional<BoundaryFitHandle> boundary_rows(const SolutionTable& table, Side side);

}  // namespace hsl
