#include "hsl/barriers.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsl/rk.hpp"

namespace hsl {

using DR = DomainError::Reason;

std::pair<double, double> DistanceModel::laplacian_bounds(double delta) const {
  return {-(N - 1) / (rho0 - delta), (N - 1) / (rho0 + delta)};
}

DistanceModel distance_model(const Problem& problem) {
  problem.validate();
  DistanceModel dm;
  dm.N = problem.N;
  if (problem.is_ball()) {
    dm.rho0 = problem.outer_radius();
    dm.curvature_bound = 1.0 / dm.rho0;
  } else {
    const double r0 = problem.inner_radius(), R = problem.outer_radius();
    dm.rho0 = std::min(r0, 0.5 * (R - r0));
    dm.curvature_bound = 1.0 / r0;
  }
  return dm;
}

bool is_upper(const BarrierKind& kind) {
  return std::holds_alternative<UpperPosMu>(kind) || std::holds_alternative<UpperNegMu>(kind) ||
         std::holds_alternative<UpperDeadCore>(kind);
}

std::string kind_name(const BarrierKind& kind) {
  static const char* names[] = {"UpperPosMu", "LowerPosMu", "UpperNegMu", "LowerNegMu",
                                "UpperDeadCore"};
  return names[kind.index()];
}

double BarrierProfile::operator()(double d) const {
  if (eval) return eval(d);
  // Linear interpolation in the stored samples; constant outside.
  if (delta.size() == 0) return 0.0;
  if (d <= delta(0)) return values(0);
  const Eigen::Index n = delta.size();
  if (d >= delta(n - 1)) return values(n - 1);
  const auto it = std::upper_bound(delta.data(), delta.data() + n, d);
  const Eigen::Index j = (it - delta.data()) - 1;
  const double t = (d - delta(j)) / (delta(j + 1) - delta(j));
  return (1 - t) * values(j) + t * values(j + 1);
}

namespace {

// Solution of the comparison ODE in the distance variable,
//   u'' = -κ(N-1)/(ρ0 + κδ) u' - μ u/δ² + u^p,
// known at table rows and evaluated anywhere by a short integration from
// the nearest row. κ = -1 for η(ρ0 - δ), +1 for z(δ).
struct ComparisonSolution {
  double mu, p, rho0, kappa;
  int N;
  std::vector<double> d, u, ud;  // ascending d
  double cutoff;                 // value `beyond` for δ >= cutoff
  double beyond;

  double operator()(double delta) const {
    if (delta >= cutoff) return beyond;
    std::size_t j = std::lower_bound(d.begin(), d.end(), delta) - d.begin();
    if (j == d.size()) {
      j = d.size() - 1;
    } else if (j > 0 && std::log(delta / d[j - 1]) < std::log(d[j] / delta)) {
      --j;
    }
    if (d[j] == delta) return u[j];
    return integrate_to(j, delta);
  }

  double integrate_to(std::size_t j, double target) const {
    using DP = DormandPrince<double, 2>;
    auto f = [&](double t, const DP::State& y) {
      const double up = std::pow(std::max(y(0), 0.0), p);
      return DP::State(y(1), -kappa * (N - 1) / (rho0 + kappa * t) * y(1) - mu * y(0) / (t * t) + up);
    };
    double t = d[j];
    DP::State y(u[j], ud[j]);
    const double scale = std::max(std::abs(u[j]), 1e-300);
    const DP::State atol(1e-16 * scale, 1e-16 * scale / t);
    double h = (target - t) / 4;
    typename DP::Controller ctl;
    for (int it = 0; it < 100000; ++it) {
      if (std::abs(target - t) <= 1e-15 * std::abs(target)) break;
      if (std::abs(h) > std::abs(target - t)) h = target - t;
      const auto trial = DP::attempt(f, t, y, h);
      const double err = DP::error_norm(trial, y, atol, 1e-13);
      if (err <= 1.0) {
        t += h;
        y = trial.y;
        h = ctl.next(h, err, true);
      } else {
        h = ctl.next(h, err, false);
      }
    }
    return std::max(y(0), 0.0);
  }
};

// Pulls (δ, u, du/dδ) rows with δ < cutoff and u > 0 out of a radial table.
void take_rows(const SolutionTable& t, double rho0, double kappa, double cutoff,
               ComparisonSolution& out) {
  std::vector<std::tuple<double, double, double>> rows;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    // δ measured from the collar's own boundary at ρ0.
    const double delta = kappa < 0 ? t.delta(i) : t.r(i) - rho0;
    if (!(delta > 0.0 && delta < cutoff && t.u(i) > 0.0)) continue;
    rows.emplace_back(delta, t.u(i), kappa * t.u_prime(i));
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [d, u, ud] : rows) {
    if (!out.d.empty() && d == out.d.back()) continue;
    out.d.push_back(d);
    out.u.push_back(u);
    out.ud.push_back(ud);
  }
}

BarrierProfile sampled(BarrierKind kind, std::function<double(double)> eval, const Problem& pb,
                       const DistanceModel& dm) {
  BarrierProfile b;
  b.kind = kind;
  b.eval = std::move(eval);
  b.delta = barrier_samples(dm);
  b.values = b.delta.unaryExpr([&](double d) { return b.eval(d); });
  b.verified_margin = verify_barrier(b, pb, dm);
  return b;
}

bool below(const BarrierProfile& lo, const BarrierProfile& hi) {
  for (Eigen::Index i = 0; i < lo.delta.size(); ++i)
    if (lo.values(i) > hi(lo.delta(i))) return false;
  return true;
}

}  // namespace

Eigen::VectorXd barrier_samples(const DistanceModel& dm, int samples) {
  if (samples < 2) throw DomainError(DR::Precondition, "need at least 2 barrier samples");
  Eigen::VectorXd d(samples);
  const double lo = 1e-8 * dm.rho0, hi = 0.95 * dm.rho0;
  for (int i = 0; i < samples; ++i) d(i) = lo * std::pow(hi / lo, double(i) / (samples - 1));
  return d;
}

double verify_barrier(const BarrierProfile& profile, const Problem& problem, const DistanceModel& dm,
                      int samples) {
  const Eigen::VectorXd ds = barrier_samples(dm, samples);
  const bool upper = profile.upper();
  const double mu = problem.mu, p = problem.p;
  double margin = std::numeric_limits<double>::infinity();
  for (double d : ds) {
    const double h = 1e-3 * d;
    const double f0 = profile(d), f1p = profile(d + h), f1m = profile(d - h), f2p = profile(d + 2 * h),
                 f2m = profile(d - 2 * h);
    const double d2 = (-f2p + 16 * f1p - 30 * f0 + 16 * f1m - f2m) / (12 * h * h);
    const double d2lo = (f1p - 2 * f0 + f1m) / (h * h);
    const double d1 = (-f2p + 8 * f1p - 8 * f1m + f2m) / (12 * h);
    const double d1lo = (f1p - f1m) / (2 * h);
    const auto [lap_lo, lap_hi] = dm.laplacian_bounds(d);
    // Adverse choice of Δδ for the sign being certified.
    const double lap = (d1 > 0) == upper ? lap_hi : lap_lo;
    const double res = d2 + d1 * lap + mu * f0 / (d * d) - std::pow(std::max(f0, 0.0), p);
    double m = upper ? -res : res;
    const double fmax = std::max({std::abs(f0), std::abs(f1p), std::abs(f1m), std::abs(f2p), std::abs(f2m)});
    const double err = std::abs(d2 - d2lo) + std::abs(d1 - d1lo) * std::max(std::abs(lap_lo), lap_hi) +
                       1e-13 * fmax / (h * h);
    if (m < 0 && -m <= 10 * err) m = 0.0;
    margin = std::min(margin, m);
  }
  return margin;
}

BarrierPair build_barriers_positive_mu(const Problem& problem, const DistanceModel& dm,
                                       const PositiveMuParams& prm) {
  problem.validate_subcritical();
  if (!(problem.mu > 0.0)) throw DomainError(DR::Precondition, "positive-mu barriers need 0 < mu < 1/4");
  const double beta = indicial_exponents(problem.mu).first;
  const double gap = 1.0 - 2.0 * beta;
  const double mu = problem.mu, p = problem.p;

  const double eps = prm.epsilon != 0.0 ? prm.epsilon : 0.5 * (gap + 1.0);
  if (!(eps > gap && eps < 1.0))
    throw DomainError(DR::ParameterOutOfRange, "epsilon must lie strictly between 1-2*beta_minus and 1");
  const double eps_low = prm.epsilon_low != 0.0 ? prm.epsilon_low : 0.5 * gap;
  if (!(eps_low > 0.0 && eps_low < gap))
    throw DomainError(DR::ParameterOutOfRange, "epsilon_low must lie strictly between 0 and 1-2*beta_minus");
  if (prm.rho != 0.0 && !(prm.rho > 0.0 && prm.rho < 0.5 * dm.rho0))
    throw DomainError(DR::ParameterOutOfRange, "rho must lie in (0, rho0/2)");
  if (!(prm.M >= 0.0)) throw DomainError(DR::ParameterOutOfRange, "M must be positive");

  double M = prm.M > 0.0 ? prm.M : 1.0;
  double rho = prm.rho > 0.0 ? prm.rho : 0.45 * dm.rho0;

  auto phi = [beta](double M_, double e, double r, double s) {
    return M_ * std::pow(s, beta) * (std::pow(r, e) - std::pow(s, e));
  };
  auto make_upper = [&](double M_, double r) {
    const double dbar = std::pow(beta / (beta + eps), 1.0 / eps) * r;
    const double cap = phi(M_, eps, r, dbar);
    auto f = [=](double s) { return s <= 0.0 ? 0.0 : s < dbar ? phi(M_, eps, r, s) : cap; };
    return sampled(UpperPosMu{M_, eps, r, dbar, cap}, f, problem, dm);
  };

  BarrierProfile upper;
  bool ok = false;
  for (int shrink = 0; shrink <= kMaxShrinks && !ok; ++shrink) {
    const double dbar = std::pow(beta / (beta + eps), 1.0 / eps) * rho;
    // Constant cap must be an upper solution beyond δ̄.
    int m_steps = 0;
    while (mu * std::pow(phi(M, eps, rho, dbar), 1.0 - p) / (dbar * dbar) >= 1.0) {
      if (++m_steps > kMaxShrinks) throw ConstructionError("no M satisfies the cap inequality");
      M *= 0.5;
    }
    upper = make_upper(M, rho);
    ok = upper.verified_margin >= 0.0;
    if (!ok) {
      if (prm.rho > 0.0) break;
      rho *= 0.5;
    }
  }
  if (!ok) throw ConstructionError("upper barrier margin stays negative", upper.verified_margin);

  const auto& U = std::get<UpperPosMu>(upper.kind);
  if (prm.rho_low != 0.0 && !(prm.rho_low > 0.0 && prm.rho_low < U.delta_bar))
    throw DomainError(DR::ParameterOutOfRange, "rho_low must lie in (0, delta_bar)");
  double rho_low = prm.rho_low > 0.0 ? prm.rho_low : 0.5 * U.delta_bar;
  BarrierProfile lower;
  ok = false;
  for (int shrink = 0; shrink <= kMaxShrinks && !ok; ++shrink) {
    const double r = rho_low;
    auto f = [=](double s) { return s <= 0.0 || s >= r ? 0.0 : phi(M, eps_low, r, s); };
    lower = sampled(LowerPosMu{M, eps_low, r}, f, problem, dm);
    ok = lower.verified_margin >= 0.0 && below(lower, upper);
    if (!ok) {
      if (prm.rho_low > 0.0) break;
      rho_low *= 0.5;
    }
  }
  if (!ok) throw ConstructionError("lower barrier margin or ordering fails", lower.verified_margin);
  return {lower, upper};
}

namespace {

Problem comparison_ball(const Problem& problem, double rho0) {
  Problem pb = problem;
  pb.geometry = Ball{rho0};
  return pb;
}

// η with η(ρ0 - σ) = M, η' = 0, as a function of δ = ρ0 - r.
std::shared_ptr<ComparisonSolution> eta_profile(const Problem& problem, double rho0, double M,
                                                double sigma) {
  const Problem pb = comparison_ball(problem, rho0);
  const SolutionTable t = integrate(pb, {rho0 - sigma, M, 0.0}, Direction::Outward);
  if (!t.has_event(EventKind::ReachedBoundary))
    throw ConvergenceError("eta integration did not reach the boundary");
  for (Eigen::Index i = 0; i < t.size(); ++i)
    if (t.u_prime(i) < 0.0) throw ConvergenceError("eta is not increasing");
  auto s = std::make_shared<ComparisonSolution>(
      ComparisonSolution{problem.mu, problem.p, rho0, -1.0, problem.N, {}, {}, {}, sigma, M});
  take_rows(t, rho0, -1.0, sigma, *s);
  // Start row itself.
  s->d.push_back(sigma);
  s->u.push_back(M);
  s->ud.push_back(0.0);
  return s;
}

}  // namespace

BarrierPair build_barriers_negative_mu(const Problem& problem, const DistanceModel& dm,
                                       const NegativeMuParams& prm) {
  problem.validate();
  if (!(problem.mu < 0.0)) throw DomainError(DR::Precondition, "negative-mu barriers need mu < 0");
  const double rho0 = dm.rho0;
  const double sigma_bar = prm.sigma_bar > 0.0 ? prm.sigma_bar : 0.5 * rho0;
  if (!(sigma_bar < rho0)) throw DomainError(DR::ParameterOutOfRange, "sigma_bar must be below rho0");
  if (!(prm.M > 0.0)) throw DomainError(DR::ParameterOutOfRange, "M must be positive");

  const auto eta = eta_profile(problem, rho0, prm.M, sigma_bar);
  BarrierProfile upper = sampled(UpperNegMu{prm.M, sigma_bar}, [eta](double d) { return (*eta)(d); },
                                 problem, dm);
  if (upper.verified_margin < 0.0)
    throw ConstructionError("upper barrier margin is negative", upper.verified_margin);

  double sigma = prm.sigma_low > 0.0 ? prm.sigma_low : 0.25 * rho0;
  if (!(sigma < rho0)) throw DomainError(DR::ParameterOutOfRange, "sigma_low must be below rho0");
  BarrierProfile lower;
  for (int shrink = 0; shrink <= kMaxShrinks; ++shrink) {
    Problem pb = problem;
    pb.geometry = Annulus{rho0, rho0 + 3 * sigma};
    const SolutionTable t = assemble_with_deadcore(pb, rho0 + sigma, rho0 + 3 * sigma, prm.seeds);
    if (!t.has_event(EventKind::ReachedBoundary))
      throw ConvergenceError("dead-core profile z did not reach the boundary");
    auto z = std::make_shared<ComparisonSolution>(
        ComparisonSolution{problem.mu, problem.p, rho0, 1.0, problem.N, {}, {}, {}, sigma, 0.0});
    take_rows(t, rho0, 1.0, sigma, *z);
    lower = sampled(LowerNegMu{sigma}, [z](double d) { return (*z)(d); }, problem, dm);
    if (lower.verified_margin >= 0.0 && below(lower, upper)) return {lower, upper};
    sigma *= 0.5;
  }
  throw ConstructionError("lower barrier stays above the upper one", lower.verified_margin);
}

BarrierProfile build_deadcore_upper(const Problem& problem, const DistanceModel& dm,
                                    const BarrierPair& base, double rho, const PicardConfig& seeds) {
  problem.validate_subcritical();
  const double rho0 = dm.rho0;
  double floor = 0.0;  // ρ must exceed the cap location
  if (const auto* u = std::get_if<UpperPosMu>(&base.upper.kind)) floor = u->delta_bar;
  if (!(rho > floor && rho < rho0))
    throw DomainError(DR::ParameterOutOfRange, "dead-core radius must lie in (delta_bar, rho0)");

  // Zero-data comparison solution from the dead point ρ0 - ρ outward.
  const Problem pb = comparison_ball(problem, rho0);
  const Seed seed = deadcore_seed(pb, DeadCoreInteriorAt{rho0 - rho}, seeds, +1);
  const SolutionTable t = solve_from_seed(seed);
  auto eta = std::make_shared<ComparisonSolution>(
      ComparisonSolution{problem.mu, problem.p, rho0, -1.0, problem.N, {}, {}, {}, rho, 0.0});
  // Keep the increasing part only: rows from the dead point until η' first vanishes.
  SolutionTable inc = t;
  Eigen::Index stop = t.size();
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t.r(i) <= rho0 - rho) continue;
    if (t.u_prime(i) <= 0.0) {
      stop = i;
      break;
    }
  }
  inc.r = t.r.head(stop);
  inc.u = t.u.head(stop);
  inc.u_prime = t.u_prime.head(stop);
  inc.delta = t.delta.head(stop);
  take_rows(inc, rho0, -1.0, rho, *eta);
  if (eta->d.size() < 4) throw ConstructionError("dead-core comparison solution is too short");
  const double d_end = eta->d.front();  // η increasing on (d_end, ρ)

  const BarrierProfile& U = base.upper;
  auto g = [&](double d) { return (*eta)(d)-U(d); };
  // First crossing going inward from ρ, located on the table rows then bisected.
  double rho_t = -1.0;
  for (std::size_t k = eta->d.size() - 1; k-- > 0;) {
    const double a = eta->d[k], b = eta->d[k + 1];
    if (g(a) >= 0.0 && g(b) < 0.0) {
      double lo = a, hi = b;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double m = 0.5 * (lo + hi);
        (g(m) >= 0.0 ? lo : hi) = m;
      }
      rho_t = hi;
      break;
    }
  }

  double m = 1.0;
  if (rho_t < 0.0) {
    if (problem.mu < 0.0 && d_end <= 1e-10 * rho0) {
      rho_t = 0.0;  // η stays below the collar profile all the way out
    } else {
      // Rescale the collar profile to meet η on its constant part.
      rho_t = std::max(d_end, floor) * 1.01;
      if (!(rho_t < rho)) throw ConstructionError("no room to splice below the dead-core radius");
      m = (*eta)(rho_t) / U(rho_t);
      if (!(m > 0.0 && m < 1.0)) throw ConstructionError("rescaling factor outside (0, 1)", m);
    }
  }
  auto f = [eta, U, rho_t, m, rho](double d) {
    if (d >= rho) return 0.0;
    if (d >= rho_t) return (*eta)(d);
    return m * U(d);
  };
  BarrierProfile out = sampled(UpperDeadCore{rho, rho_t, m}, f, problem, dm);
  if (out.verified_margin < 0.0)
    throw ConstructionError("dead-core upper barrier margin is negative", out.verified_margin);
  return out;
}

Mesh1D iteration_mesh(const Problem& problem, int n, double delta_min) {
  problem.validate();
  if (n < 8 || n % 2 != 0) throw DomainError(DR::Precondition, "iteration mesh needs even n >= 8");
  const double L = problem.length();
  if (delta_min <= 0.0) delta_min = 1e-8 * L;
  Mesh1D m;
  m.grading = 1.0;
  m.weight_power = problem.N - 1;
  m.nodes.resize(n + 1);
  m.delta.resize(n + 1);
  const double R = problem.outer_radius();
  if (problem.is_ball()) {
    m.a = 0.0;
    m.b = R;
    for (int k = 0; k <= n; ++k) {
      const double d = k == n ? R : delta_min * std::pow(R / delta_min, double(k) / n);
      m.delta(n - k) = d;
      m.nodes(n - k) = k == n ? 0.0 : R - d;
    }
  } else {
    const double r0 = problem.inner_radius(), half = 0.5 * (R - r0);
    m.a = r0;
    m.b = R;
    const int h = n / 2;
    for (int k = 0; k <= h; ++k) {
      const double d = k == h ? half : delta_min * std::pow(half / delta_min, double(k) / h);
      m.delta(k) = d;
      m.nodes(k) = r0 + d;
      m.delta(n - k) = d;
      m.nodes(n - k) = R - d;
    }
  }
  return m;
}

IterationResult monotone_iteration(const Problem& problem, const BarrierPair& pair, const Mesh1D& mesh,
                                   const IterationOptions& opt) {
  problem.validate_subcritical();
  const int n = mesh.intervals();
  const int N = problem.N;
  const double mu = problem.mu, p = problem.p;
  const bool ball = problem.is_ball();
  if (n < 2 || mesh.delta.size() != n + 1) throw DomainError(DR::Precondition, "malformed mesh");

  const Eigen::VectorXd& r = mesh.nodes;
  const Eigen::VectorXd& dl = mesh.delta;
  // Spacing from δ where it is exact.
  auto spacing = [&](int i) {
    const double rm = 0.5 * (problem.inner_radius() + problem.outer_radius());
    if (r(i) >= rm && r(i + 1) >= rm) return dl(i) - dl(i + 1);
    if (!ball && r(i + 1) <= rm) return dl(i + 1) - dl(i);
    return r(i + 1) - r(i);
  };
  std::vector<double> h(n), mid(n), flux(n), vol(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    h[i] = spacing(i);
    mid[i] = r(i) + 0.5 * h[i];
    flux[i] = std::pow(mid[i], N - 1) / h[i];
  }
  // Cell volumes ∫ r^{N-1} dr = (b^N - a^N)/N written without cancellation.
  auto shell = [N](double a, double b) {
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += std::pow(b, j) * std::pow(a, N - 1 - j);
    return (b - a) * s / N;
  };
  for (int i = 0; i <= n; ++i) {
    const double a = i == 0 ? r(0) : mid[i - 1];
    const double b = i == n ? r(n) : mid[i];
    const double w = (i == 0 ? 0.0 : 0.5 * h[i - 1]) + (i == n ? 0.0 : 0.5 * h[i]);
    vol[i] = a < b ? w * shell(a, b) / (b - a) : 0.0;
  }

  // Unknowns: every node except the Dirichlet ones.
  const int first = ball ? 0 : 1, last = n - 1;
  const int m = last - first + 1;
  Eigen::VectorXd lo(n + 1), up(n + 1);
  for (int i = 0; i <= n; ++i) {
    lo(i) = pair.lower(dl(i));
    up(i) = pair.upper(dl(i));
    if (lo(i) > up(i))
      throw DomainError(DR::Precondition, "barriers are not ordered at node " + std::to_string(i));
  }
  Eigen::VectorXd u = up;
  // Dirichlet data: the upper barrier at δ_min.
  const double g_out = up(n), g_in = ball ? 0.0 : up(0);
  u(n) = g_out;
  if (!ball) u(0) = g_in;

  IterationResult res;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analysed = false;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * m);
    Eigen::VectorXd rhs(m);
    for (int i = first; i <= last; ++i) {
      const int k = i - first;
      const double ui = u(i), li = lo(i);
      double s = 0.0;
      if (ui - li > 1e-14 * ui)
        s = (std::pow(ui, p) - std::pow(li, p)) / (ui - li);
      else if (ui > 0.0)
        s = p * std::pow(ui, p - 1.0);
      double diag = -mu * vol[i] / (dl(i) * dl(i)) + s * vol[i];
      rhs(k) = vol[i] * (s * ui - std::pow(ui, p));
      if (i > 0) {
        diag += flux[i - 1];
        if (i - 1 >= first)
          trip.emplace_back(k, k - 1, -flux[i - 1]);
        else
          rhs(k) += flux[i - 1] * g_in;
      }
      if (i < n) {
        diag += flux[i];
        if (i + 1 <= last)
          trip.emplace_back(k, k + 1, -flux[i]);
        else
          rhs(k) += flux[i] * g_out;
      }
      trip.emplace_back(k, k, diag);
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    if (!analysed) {
      solver.analyzePattern(A);
      analysed = true;
    }
    solver.factorize(A);
    if (solver.info() != Eigen::Success) throw ConvergenceError("linear solve failed");
    const Eigen::VectorXd D = solver.vectorD();
    for (int k = 0; k < m; ++k)
      if (!(D(k) > 0.0))
        throw ConvergenceError("discrete maximum principle fails: operator not positive definite (pivot " +
                               std::to_string(k) + ")");
    const Eigen::VectorXd x = solver.solve(rhs);

    double inc = 0.0, top = 0.0;
    const double umax = u.cwiseAbs().maxCoeff();
    for (int i = first; i <= last; ++i) {
      const double v = x(i - first);
      const double tol = 1e-9 * std::max(u(i), 1e-6 * umax);
      // From the second sweep on every iterate is an exact discrete
      // supersolution, so any increase is a maximum-principle failure. The
      // first sweep instead measures how far the continuous barrier is from
      // being a discrete one; that excess is reported, not enforced.
      if (sweep > 1 && v > u(i) + tol) {
        std::ostringstream msg;
        msg << "monotone iteration lost order at node " << i << " (r = " << r(i) << ", delta = " << dl(i)
            << "): increase at sweep " << sweep;
        throw ConvergenceError(msg.str(), v - u(i), tol);
      }
      double c = sweep == 1 ? v : std::min(v, u(i));
      if (c < lo(i) && c >= lo(i) - tol) c = lo(i);
      inc = std::max(inc, std::abs(u(i) - c));
      top = std::max(top, c);
      u(i) = c;
    }
    res.sweeps = sweep;
    const double rel = top > 0.0 ? inc / top : 0.0;
    res.increments.push_back(rel);
    if (rel < opt.tol) {
      res.converged = true;
      break;
    }
  }

  // δ²-weighted residual of the discrete nonlinear equation.
  for (int i = first; i <= last; ++i) {
    double lap = 0.0;
    if (i > 0) lap += flux[i - 1] * (u(i - 1) - u(i));
    if (i < n) lap += flux[i] * (u(i + 1) - u(i));
    lap /= vol[i];
    const double d2 = dl(i) * dl(i);
    res.residual = std::max(res.residual, std::abs(d2 * lap + mu * u(i) - d2 * std::pow(u(i), p)));
  }
  res.max_u = u.maxCoeff();
  for (int i = 0; i <= n; ++i) {
    const double tol = 1e-9 * std::max(u(i), 1e-6 * res.max_u);
    const double below = lo(i) - u(i), above = u(i) - up(i);
    if (below > tol || above > tol) res.sandwiched = false;
    const double scale = std::max(u(i), 1e-6 * res.max_u);
    if (scale > 0.0) res.barrier_defect = std::max({res.barrier_defect, below / scale, above / scale});
  }

  SolutionTable& t = res.table;
  t.problem = problem;
  t.r = r;
  t.u = u;
  t.delta = dl;
  t.u_prime.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    if (i == 0) {
      t.u_prime(i) = ball ? 0.0 : (u(1) - u(0)) / h[0];
    } else if (i == n) {
      t.u_prime(i) = (u(n) - u(n - 1)) / h[n - 1];
    } else {
      // Second-order on the nonuniform mesh.
      const double a = h[i - 1], b = h[i];
      t.u_prime(i) = (a * a * (u(i + 1) - u(i)) + b * b * (u(i) - u(i - 1))) / (a * b * (a + b));
    }
  }
  t.events.push_back({EventKind::ReachedBoundary, r(n), 0, 0, "outer"});
  if (!ball) t.events.push_back({EventKind::ReachedBoundary, r(0), 0, 0, "inner"});
  // Widest run of exact zeros.
  int best_a = -1, best_b = -1;
  for (int i = 0; i <= n;) {
    if (u(i) != 0.0) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 <= n && u(j + 1) == 0.0) ++j;
    if (j - i > best_b - best_a) best_a = i, best_b = j;
    i = j + 1;
  }
  if (best_a >= 0 && best_b > best_a)
    t.events.push_back({EventKind::DeadCoreInterval, r(best_a), r(best_a), r(best_b), ""});
  return res;
}

}  // namespace hsl
