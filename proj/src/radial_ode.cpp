#include "hsl/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hsl/rk.hpp"

namespace hsl {

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Vanished: return "Vanished";
    case EventKind::ReachedBoundary: return "ReachedBoundary";
    case EventKind::ReachedCenter: return "ReachedCenter";
    case EventKind::DeadCoreInterval: return "DeadCoreInterval";
    case EventKind::StepFailure: return "StepFailure";
  }
  return "StepFailure";
}

EventKind event_kind_from_string(const std::string& s) {
  for (EventKind k : {EventKind::Vanished, EventKind::ReachedBoundary, EventKind::ReachedCenter,
                      EventKind::DeadCoreInterval, EventKind::StepFailure}) {
    if (to_string(k) == s) return k;
  }
  throw DomainError(DomainError::Reason::ParameterOutOfRange, "unknown event kind '" + s + "'");
}

bool SolutionTable::has_event(EventKind kind) const { return find_event(kind) != nullptr; }

const Event* SolutionTable::find_event(EventKind kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return &e;
  return nullptr;
}

namespace {

using DP = DormandPrince<double, 2>;
using State = DP::State;
using DR = DomainError::Reason;

struct Sample {
  double r, u, up, delta;
};

SolutionTable make_table(const Problem& problem, std::vector<Sample> rows,
                         std::vector<Event> events) {
  std::sort(rows.begin(), rows.end(), [](const Sample& a, const Sample& b) { return a.r < b.r; });
  // Drop duplicates (branch joins); keep the first.
  std::vector<Sample> uniq;
  for (const auto& s : rows)
    if (uniq.empty() || s.r > uniq.back().r) uniq.push_back(s);
  SolutionTable t;
  t.problem = problem;
  const Eigen::Index n = static_cast<Eigen::Index>(uniq.size());
  t.r.resize(n);
  t.u.resize(n);
  t.u_prime.resize(n);
  t.delta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.r(i) = uniq[i].r;
    t.u(i) = std::max(uniq[i].u, 0.0);
    t.u_prime(i) = uniq[i].up;
    t.delta(i) = uniq[i].delta;
  }
  t.events = std::move(events);
  return t;
}

// Shared step loop: advances (t, y) toward t_end with the given right-hand
// side, recording accepted states. Stops early when `vanish` reports y(0) < 0,
// locating the crossing by bisection of the step.
struct Stepper {
  double rtol;
  State atol;
  double h_max;
  int max_steps;

  enum class Outcome { Reached, Vanished, Failure };

  template <class F, class Record>
  Outcome run(F&& rhs, double& t, State& y, double t_end, double& h, Record&& record,
              std::string& why, int& steps) const {
    DP::Controller ctl;
    const double sgn = t_end > t ? 1.0 : -1.0;
    h = sgn * std::min(std::abs(h), h_max);
    while (t != t_end) {
      if (++steps > max_steps) {
        why = "step limit reached";
        return Outcome::Failure;
      }
      bool landing = false;
      if ((t_end - t) / h <= 1.0 + 1e-12) {
        h = t_end - t;
        landing = true;
      }
      const auto trial = DP::attempt(rhs, t, y, h);
      if (!trial.y.allFinite()) {
        h *= 0.25;
        if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t))) {
          why = "non-finite state";
          return Outcome::Failure;
        }
        continue;
      }
      const double err = DP::error_norm(trial, y, atol, rtol);
      if (err <= 1.0) {
        if (trial.y(0) < 0.0 && y(0) >= 0.0) {
          // Bisect the step length for the zero of the first component.
          double lo = 0.0, hi = h;
          State at_hi = trial.y;
          while (std::abs(hi - lo) > 1e-12 * std::max(std::abs(t + hi), 1e-300)) {
            const double mid = 0.5 * (lo + hi);
            const State ym = DP::attempt(rhs, t, y, mid).y;
            if (ym(0) < 0.0) {
              hi = mid;
              at_hi = ym;
            } else {
              lo = mid;
            }
          }
          t += hi;
          y = at_hi;
          y(0) = 0.0;
          record(t, y);
          return Outcome::Vanished;
        }
        t = landing ? t_end : t + h;
        y = trial.y;
        record(t, y);
        const double next = ctl.next(h, err, true);
        h = sgn * std::min(std::abs(next), h_max);
      } else {
        h = ctl.next(h, err, false);
      }
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t;
        why = msg.str();
        return Outcome::Failure;
      }
    }
    return Outcome::Reached;
  }
};

}  // namespace

SolutionTable integrate(const Problem& problem, const StartState& start, Direction direction,
                        const IntegrationOptions& opt) {
  problem.validate_subcritical();
  if (!(start.u >= 0.0)) throw DomainError(DR::Precondition, "integrate: u must be >= 0");
  const bool outward = direction == Direction::Outward;
  const bool ball = problem.is_ball();
  const double R = problem.outer_radius(), r0 = problem.inner_radius(), L = problem.length();
  const int N = problem.N;
  const double mu = problem.mu, p = problem.p;
  if (!(start.r < R && (ball ? start.r > 0.0 : start.r > r0)))
    throw DomainError(DR::Precondition, "integrate: start radius must lie inside the domain");

  const double dswitch = opt.delta_switch > 0.0 ? opt.delta_switch : 0.05 * L;
  const double dmin = opt.delta_min > 0.0 ? opt.delta_min : 1e-12 * L;
  const double rmin = opt.r_min > 0.0 ? opt.r_min : 1e-6 * R;
  const bool toward_boundary = outward || !ball;
  const double rb = outward ? R : r0;    // boundary being approached
  const double eps = outward ? -1.0 : 1.0;  // dr/dδ at that boundary
  auto target_distance = [&](double r) { return outward ? R - r : r - r0; };

  std::vector<Sample> rows;
  std::vector<Event> events;
  rows.push_back({start.r, start.u, start.u_prime, problem.distance(start.r)});

  if (start.u == 0.0 && start.u_prime == 0.0) {
    // Trivial branch.
    if (toward_boundary) {
      rows.push_back({rb + eps * dmin, 0.0, 0.0, dmin});
      events.push_back({EventKind::ReachedBoundary, rb, 0, 0, "trivial branch"});
    } else {
      rows.push_back({rmin, 0.0, 0.0, problem.distance(rmin)});
      events.push_back({EventKind::ReachedCenter, rmin, 0, 0, "trivial branch"});
    }
    return make_table(problem, std::move(rows), std::move(events));
  }

  // Phase 1: the radial equation in r.
  const double scale = std::max({std::abs(start.u), std::abs(start.u_prime) * L, 1e-300});
  Stepper stepper{opt.rtol, State(1e-3 * opt.rtol * scale, 1e-3 * opt.rtol * scale / L), 0.1 * L,
                  opt.max_steps};
  auto rhs_r = [&](double r, const State& y) {
    const double d = problem.distance(r);
    return State(y(1), std::pow(std::max(y(0), 0.0), p) - mu * y(0) / (d * d) - (N - 1) / r * y(1));
  };
  auto record_r = [&](double r, const State& y) {
    rows.push_back({r, y(0), y(1), problem.distance(r)});
  };

  double r = start.r;
  State y(start.u, start.u_prime);
  double r_end = toward_boundary ? rb + eps * dswitch : rmin;
  if (toward_boundary && target_distance(r) <= dswitch) r_end = r;
  if (!toward_boundary && r <= rmin) r_end = r;
  double h = 1e-3 * std::min(L, std::max(std::abs(r_end - r), 1e-12 * L));
  std::string why;
  int steps = 0;
  auto outcome = stepper.run(rhs_r, r, y, r_end, h, record_r, why, steps);

  if (outcome == Stepper::Outcome::Reached && toward_boundary) {
    // Phase 2: τ = ln δ, state (v, δ v'), v = u δ^{-β₋}.
    const double beta = indicial_exponents(mu).first;
    const double d_start = target_distance(r);
    const double v = y(0) * std::pow(d_start, -beta);
    const double u_d = eps * y(1);
    const double w = std::pow(d_start, 1.0 - beta) * u_d - beta * v;
    State z(v, w);
    const double vscale = std::max({std::abs(v), std::abs(w), 1e-300});
    Stepper near{opt.rtol, State(1e-3 * opt.rtol * vscale, 1e-3 * opt.rtol * vscale),
                 std::numbers::ln2 / 4.0, opt.max_steps};
    auto rhs_tau = [&](double tau, const State& s) {
      const double d = std::exp(tau);
      const double q = d / (rb + eps * d);
      return State(s(1), s(1) * (1.0 - 2.0 * beta - eps * (N - 1) * q) -
                             eps * beta * (N - 1) * q * s(0) +
                             std::pow(d, 2.0 + beta * (p - 1.0)) * std::pow(std::max(s(0), 0.0), p));
    };
    auto record_tau = [&](double tau, const State& s) {
      const double d = std::exp(tau);
      const double db = std::pow(d, beta);
      const double ud = db / d * (beta * s(0) + s(1));
      rows.push_back({rb + eps * d, db * s(0), eps * ud, d});
    };
    double tau = std::log(d_start);
    double ht = -std::numbers::ln2 / 16.0;
    outcome = near.run(rhs_tau, tau, z, std::log(dmin), ht, record_tau, why, steps);
    r = rb + eps * std::exp(tau);
    if (outcome == Stepper::Outcome::Reached)
      events.push_back({EventKind::ReachedBoundary, rb, 0, 0, ""});
  } else if (outcome == Stepper::Outcome::Reached) {
    events.push_back({EventKind::ReachedCenter, r, 0, 0, ""});
  }
  if (outcome == Stepper::Outcome::Vanished) events.push_back({EventKind::Vanished, r, 0, 0, ""});
  if (outcome == Stepper::Outcome::Failure)
    events.push_back({EventKind::StepFailure, r, 0, 0, why});
  return make_table(problem, std::move(rows), std::move(events));
}

std::optional<BoundaryFitHandle> boundary_rows(const SolutionTable& t, Side side) {
  const Problem& pb = t.problem;
  if (side == Side::Inner && pb.is_ball()) return std::nullopt;
  const double rb = pb.boundary_radius(side);
  const double half = 0.5 * pb.length();
  const Eigen::Index n = t.size();
  BoundaryFitHandle h{side, 0, -1};
  if (side == Side::Outer) {
    Eigen::Index i = n;
    while (i > 0 && rb - t.r(i - 1) < half) --i;
    h.first = i;
    h.last = n - 1;
  } else {
    Eigen::Index i = 0;
    while (i < n && t.r(i) - rb < half) ++i;
    h.first = 0;
    h.last = i - 1;
  }
  if (h.last < h.first) return std::nullopt;
  return h;
}

ShootResult shoot_from_center(const Problem& problem, double u0, const IntegrationOptions& opt) {
  problem.validate_subcritical();
  if (!problem.is_ball()) throw DomainError(DR::Precondition, "shoot_from_center needs a ball");
  if (!(u0 > 0.0)) throw DomainError(DR::Precondition, "shoot_from_center needs u0 > 0");
  const double R = problem.outer_radius();
  const int N = problem.N;
  const double a = (std::pow(u0, problem.p) - problem.mu * u0 / (R * R)) / (2.0 * N);
  const double rs = 1e-3 * R;
  auto series = [&](double r) { return State(u0 + a * r * r, 2.0 * a * r); };

  ShootResult out;
  out.series_radius = rs;
  {
    // Richardson-style check: from rs/2 to rs against the series at rs.
    const State s = series(0.5 * rs);
    Stepper st{opt.rtol, State(1e-3 * opt.rtol * u0, 1e-3 * opt.rtol * u0 / R), 0.1 * R, opt.max_steps};
    auto rhs = [&](double r, const State& y) {
      const double d = R - r;
      return State(y(1), std::pow(std::max(y(0), 0.0), problem.p) - problem.mu * y(0) / (d * d) -
                             (N - 1) / r * y(1));
    };
    double r = 0.5 * rs, h = 0.05 * rs;
    State y = s;
    std::string why;
    int steps = 0;
    st.run(rhs, r, y, rs, h, [](double, const State&) {}, why, steps);
    out.richardson_error = std::abs(y(0) - series(rs)(0)) / u0;
  }
  const State s = series(rs);
  out.table = integrate(problem, {rs, s(0), s(1)}, Direction::Outward, opt);
  // Prepend the centre.
  SolutionTable& t = out.table;
  const Eigen::Index n = t.size();
  Eigen::VectorXd r(n + 1), u(n + 1), up(n + 1), d(n + 1);
  r << 0.0, t.r;
  u << u0, t.u;
  up << 0.0, t.u_prime;
  d << R, t.delta;
  t.r = r;
  t.u = u;
  t.u_prime = up;
  t.delta = d;
  if (t.has_event(EventKind::ReachedBoundary)) out.boundary = boundary_rows(t, Side::Outer);
  return out;
}

namespace {

// Seed samples on [0 or first node, d0] as table rows.
std::vector<Sample> seed_rows(const Seed& seed) {
  std::vector<Sample> rows;
  const bool boundary = seed.kind == SeedKind::DeadCoreBoundary ||
                        seed.kind == SeedKind::RegularBoundary ||
                        seed.kind == SeedKind::SingularBoundary;
  const Problem& pb = seed.problem;
  auto push = [&](double d) {
    const RadialState s = seed_to_state(seed, d);
    rows.push_back({s.r, s.u, s.u_prime, boundary ? d : pb.distance(s.r)});
  };
  const bool deadcore = seed.kind == SeedKind::DeadCoreInterior ||
                        seed.kind == SeedKind::DeadCoreBoundary || seed.kind == SeedKind::DeadCoreOrigin;
  if (deadcore && !boundary) push(0.0);
  for (Eigen::Index i = 0; i < seed.d.size(); ++i)
    if (seed.d(i) < seed.d0) push(seed.d(i));
  push(seed.d0);
  return rows;
}

void append(std::vector<Sample>& rows, std::vector<Event>& events, const SolutionTable& t) {
  for (Eigen::Index i = 0; i < t.size(); ++i)
    rows.push_back({t.r(i), t.u(i), t.u_prime(i), t.delta(i)});
  events.insert(events.end(), t.events.begin(), t.events.end());
}

SolutionTable continue_seed(const Seed& seed, const IntegrationOptions& opt,
                            std::vector<Sample>& rows, std::vector<Event>& events) {
  const RadialState s = seed_to_state(seed, seed.d0);
  IntegrationOptions o = opt;
  if (o.delta_switch == 0.0) o.delta_switch = std::min(0.05 * seed.problem.length(), seed.d0);
  const Direction dir = seed.direction > 0 ? Direction::Outward : Direction::Inward;
  SolutionTable t = integrate(seed.problem, {s.r, s.u, s.u_prime}, dir, o);
  auto srows = seed_rows(seed);
  rows.insert(rows.end(), srows.begin(), srows.end());
  append(rows, events, t);
  return t;
}

}  // namespace

SolutionTable solve_from_seed(const Seed& seed, const IntegrationOptions& opt) {
  std::vector<Sample> rows;
  std::vector<Event> events;
  continue_seed(seed, opt, rows, events);
  return make_table(seed.problem, std::move(rows), std::move(events));
}

SolutionTable assemble_with_deadcore(const Problem& problem, double a, double b,
                                     const PicardConfig& config, const IntegrationOptions& opt) {
  problem.validate_subcritical();
  const double R = problem.outer_radius(), r0 = problem.inner_radius();
  if (!(a <= b)) throw DomainError(DR::Precondition, "dead core needs a <= b");
  if (problem.is_ball()) {
    if (a != 0.0 || !(b < R))
      throw DomainError(DR::Precondition, "in a ball the dead core is [0, b] with b < R");
  } else if (!(a >= r0 && b <= R) || (a == r0 && b == R)) {
    throw DomainError(DR::Precondition, "dead core must lie inside [r0, R] and leave a gap");
  }

  std::vector<Sample> rows;
  std::vector<Event> events;
  const bool ball = problem.is_ball();
  // Outward branch from b.
  if (b < R) {
    if (ball && b == 0.0) {
      continue_seed(deadcore_seed(problem, DeadCoreOriginAt{}, config), opt, rows, events);
    } else {
      continue_seed(deadcore_seed(problem, DeadCoreInteriorAt{b}, config, +1), opt, rows, events);
    }
  }
  // Inward branch from a.
  if (!ball && a > r0)
    continue_seed(deadcore_seed(problem, DeadCoreInteriorAt{a}, config, -1), opt, rows, events);

  // The core itself.
  constexpr int core_samples = 16;
  for (int i = 0; i <= core_samples; ++i) {
    const double r = a + (b - a) * i / core_samples;
    if (ball || (r > r0 && r < R)) rows.push_back({r, 0.0, 0.0, problem.distance(r)});
    if (a == b) break;
  }
  events.push_back({EventKind::DeadCoreInterval, a, a, b, ""});
  return make_table(problem, std::move(rows), std::move(events));
}

}  // namespace hsl
