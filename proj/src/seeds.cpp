#include "hsl/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsl/quadrature.hpp"
#include "hsl/rk.hpp"

namespace hsl {

namespace detail {

/// u and du/dd of a seed at distance d from its anchor.
struct SeedEvaluator {
  virtual ~SeedEvaluator() = default;
  virtual std::pair<double, double> eval(double d) const = 0;
};

}  // namespace detail

std::string to_string(SeedKind kind) {
  switch (kind) {
    case SeedKind::DeadCoreInterior: return "DeadCoreInterior";
    case SeedKind::DeadCoreBoundary: return "DeadCoreBoundary";
    case SeedKind::DeadCoreOrigin: return "DeadCoreOrigin";
    case SeedKind::RegularBoundary: return "RegularBoundary";
    case SeedKind::SingularBoundary: return "SingularBoundary";
  }
  return "DeadCoreInterior";
}

SeedKind seed_kind_from_string(const std::string& s) {
  for (SeedKind k : {SeedKind::DeadCoreInterior, SeedKind::DeadCoreBoundary,
                     SeedKind::DeadCoreOrigin, SeedKind::RegularBoundary,
                     SeedKind::SingularBoundary}) {
    if (to_string(k) == s) return k;
  }
  throw DomainError(DomainError::Reason::ParameterOutOfRange, "unknown seed kind '" + s + "'");
}

std::string to_string(SingularExpansion::Case c) {
  switch (c) {
    case SingularExpansion::Case::BetaInMinusHalfZero: return "BetaInMinusHalfZero";
    case SingularExpansion::Case::BetaEqualMinusHalf: return "BetaEqualMinusHalf";
    case SingularExpansion::Case::BetaBelowMinusHalf: return "BetaBelowMinusHalf";
  }
  return "BetaInMinusHalfZero";
}

double default_d0(const Problem& problem) { return 0.05 * problem.length(); }

namespace {

using DR = DomainError::Reason;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Picard driver

struct PicardOutcome {
  Eigen::VectorXd w;
  int iterations = 0;
  double worst_ratio = 0.0;
  double last = 0.0, previous = 0.0;
  double sup_w = 0.0;
  bool converged = false;
  std::string failure;
};

template <class Step>
PicardOutcome picard(Step&& step, Eigen::VectorXd w, const PicardConfig& cfg, double ratio_bound,
                     double M, double floor) {
  constexpr int burn_in = 10;
  PicardOutcome out;
  double prev = kInf;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Eigen::VectorXd next = step(w);
    out.iterations = it;
    if (!next.allFinite()) {
      out.failure = "non-finite Picard iterate";
      break;
    }
    const double sup = next.cwiseAbs().maxCoeff();
    out.sup_w = std::max(out.sup_w, sup);
    if (sup > M) {
      std::ostringstream msg;
      msg << "Picard iterate left the ball |w| <= " << M << " (sup " << sup << ")";
      out.failure = msg.str();
      break;
    }
    const double diff = (next - w).cwiseAbs().maxCoeff();
    if (it > burn_in && diff > floor && prev > floor && std::isfinite(prev)) {
      const double ratio = diff / prev;
      out.worst_ratio = std::max(out.worst_ratio, ratio);
      if (ratio > ratio_bound) {
        std::ostringstream msg;
        msg << "contraction ratio " << ratio << " exceeds " << ratio_bound;
        out.failure = msg.str();
        out.previous = prev;
        out.last = diff;
        break;
      }
    }
    out.previous = prev;
    out.last = diff;
    w = std::move(next);
    prev = diff;
    if (diff <= cfg.tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged && out.failure.empty()) out.failure = "Picard iteration hit max_iter";
  out.w = std::move(w);
  return out;
}

// ---------------------------------------------------------------------------
// Geometry of the d coordinate: r = anchor + dir·d.

struct Frame {
  Problem problem;
  double anchor;
  int dir;
  bool boundary;  // d is the boundary distance itself

  double radius(double d) const { return anchor + dir * d; }
  double delta(double d) const { return boundary ? d : problem.distance(radius(d)); }
};

// |ODE residual| of (u, u_d) given by `eval` at d, with u_dd by a fourth-order
// centred difference of u_d. Returns (absolute, relative to the term sizes).
std::pair<double, double> residual_at(const Frame& f, const detail::SeedEvaluator& ev, double d) {
  const int N = f.problem.N;
  const double h = 1e-3 * d;
  const double up2 = ev.eval(d + 2 * h).second, up1 = ev.eval(d + h).second;
  const double um1 = ev.eval(d - h).second, um2 = ev.eval(d - 2 * h).second;
  const auto [u, ud] = ev.eval(d);
  const double udd = (um2 - 8 * um1 + 8 * up1 - up2) / (12 * h);
  const double r = f.radius(d), del = f.delta(d);
  const double t1 = udd, t2 = f.dir * (N - 1) / r * ud, t3 = f.problem.mu * u / (del * del);
  const double t4 = std::pow(std::max(u, 0.0), f.problem.p);
  const double res = std::abs(t1 + t2 + t3 - t4);
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4);
  return {res, scale > 0 ? res / scale : 0.0};
}

void certify_residual(const Frame& f, const detail::SeedEvaluator& ev, double d0,
                      SeedCertificate& cert) {
  constexpr int points = 20;
  cert.residual_abs = cert.residual_rel = 0.0;
  for (int i = 0; i < points; ++i) {
    // log-spaced in (d0/100, d0], kept a stencil width inside
    const double d = d0 * std::pow(100.0, -double(i) / points) / (1 + 2.5e-3);
    const auto [a, r] = residual_at(f, ev, d);
    cert.residual_abs = std::max(cert.residual_abs, a);
    cert.residual_rel = std::max(cert.residual_rel, r);
  }
}

void fill_profile(Seed& seed, const detail::SeedEvaluator& ev, const Eigen::VectorXd& nodes,
                  const Eigen::VectorXd& values) {
  seed.d = nodes;
  seed.values = values;
  seed.u.resize(nodes.size());
  seed.du_dd.resize(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    const auto [u, ud] = ev.eval(nodes(i));
    seed.u(i) = u;
    seed.du_dd(i) = ud;
  }
}

[[noreturn]] void fail(const std::string& what, const PicardOutcome& o) {
  throw ConvergenceError(what + ": " + o.failure, o.last, o.previous);
}

// ---------------------------------------------------------------------------
// Dead-core seeds:  u = d^k (c + w),  w = t^{-k} ∫ K_N(s,t) F(s) ds - c.

class DeadCoreEvaluator : public detail::SeedEvaluator {
 public:
  DeadCoreEvaluator(Frame frame, double c, quad::GradedPanels mesh)
      : f_(std::move(frame)), c_(c), mesh_(std::move(mesh)) {
    k_ = 2.0 / (1.0 - f_.problem.p);
  }

  // K_N(s, t): solves the radial operator in t with K = 0, ∂_t K = 1 at t = s.
  double green(double s, double t) const {
    const int N = f_.problem.N;
    if (N == 1) return t - s;
    const double rs = f_.radius(s);
    const double x = f_.dir * (t - s) / rs;  // ρ(t)/ρ(s) - 1
    if (N == 2) return f_.dir * rs * std::log1p(x);
    return f_.dir * rs / (N - 2) * -std::expm1(-(N - 2) * std::log1p(x));
  }

  // ∂_t K_N(s, t) = (ρ(s)/ρ(t))^{N-1}
  double green_t(double s, double t) const {
    const int N = f_.problem.N;
    if (N == 1) return 1.0;
    return std::pow(f_.radius(s) / f_.radius(t), N - 1);
  }

  // F(s) = s^{k-2} G(s)
  Eigen::VectorXd G(const Eigen::VectorXd& w) const {
    const auto& s = mesh_.nodes();
    Eigen::VectorXd g(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double cw = c_ + w(i);
      const double del = f_.delta(s(i));
      g(i) = std::pow(std::max(cw, 0.0), f_.problem.p) - f_.problem.mu * cw * (s(i) / del) * (s(i) / del);
    }
    return g;
  }

  // Matrix of w ↦ t^{-k} ∫ K s^{k-2} G.
  Eigen::MatrixXd operator_matrix() const {
    return mesh_.volterra_matrix([&](double s, double t) {
      return green(s, t) / (t * t) * std::pow(s / t, k_ - 2.0);
    });
  }

  void set_solution(const Eigen::VectorXd& w) { g_ = G(w); }

  std::pair<double, double> eval(double d) const override {
    if (d <= 0.0) return {0.0, 0.0};
    const double kk = k_;
    const double u = mesh_.integration_row(d, [&](double s) {
                            return green(s, d) * std::pow(s, kk - 2.0);
                          }).dot(g_);
    const double ud = mesh_.integration_row(d, [&](double s) {
                             return green_t(s, d) * std::pow(s, kk - 2.0);
                           }).dot(g_);
    return {u, ud};
  }

  double w_at(double d) const { return eval(d).first / std::pow(d, k_) - c_; }

 private:
  Frame f_;
  double c_, k_;
  quad::GradedPanels mesh_;
  Eigen::VectorXd g_;
};

// Boundary-seed linear rate |p(μ*+μ) - μ|/μ*; interior and origin ≈ p.
double linear_rate(const Problem& problem, SeedKind kind) {
  if (kind != SeedKind::DeadCoreBoundary) return problem.p;
  const double ms = mu_star(problem.p);
  return std::abs(problem.p * (ms + problem.mu) - problem.mu) / ms;
}

}  // namespace

Seed deadcore_seed(const Problem& problem, const DeadCoreLocation& location,
                   const PicardConfig& config, int direction) {
  problem.validate();
  const double p = problem.p;
  const auto coeffs = deadcore_coefficients(problem);

  Seed seed;
  seed.problem = problem;
  seed.exponent = 2.0 / (1.0 - p);
  Frame frame{problem, 0.0, +1, false};
  double d0_cap = kInf;

  if (const auto* at = std::get_if<DeadCoreInteriorAt>(&location)) {
    const double R0 = at->R0;
    if (!(R0 > problem.inner_radius() && R0 < problem.outer_radius()))
      throw DomainError(DR::Precondition, "dead-core point must lie strictly inside the domain");
    if (direction != 1 && direction != -1)
      throw DomainError(DR::Precondition, "direction must be +1 or -1");
    seed.kind = SeedKind::DeadCoreInterior;
    seed.coefficient = coeffs.c_p;
    frame = Frame{problem, R0, direction, false};
    d0_cap = 0.5 * (direction > 0 ? problem.outer_radius() - R0 : R0 - problem.inner_radius());
  } else if (const auto* bd = std::get_if<DeadCoreBoundaryAt>(&location)) {
    if (!coeffs.c_boundary)
      throw DomainError(DR::RegimeNonexistent,
                        "boundary dead-core profile needs mu > -mu_star");
    seed.kind = SeedKind::DeadCoreBoundary;
    seed.side = bd->side;
    seed.coefficient = *coeffs.c_boundary;
    const int dir = bd->side == Side::Outer ? -1 : +1;
    frame = Frame{problem, problem.boundary_radius(bd->side), dir, true};
  } else {
    if (!problem.is_ball())
      throw DomainError(DR::Precondition, "origin dead-core seed needs a ball");
    seed.kind = SeedKind::DeadCoreOrigin;
    seed.coefficient = *coeffs.c_origin;
    frame = Frame{problem, 0.0, +1, false};
    d0_cap = 0.5 * problem.outer_radius();
  }
  seed.anchor = frame.anchor;
  seed.direction = frame.dir;

  const double c = seed.coefficient;
  double alpha = config.contraction_alpha;
  if (alpha == 0.0)
    alpha = std::max((1.0 + p) / 2.0, std::min(0.995, linear_rate(problem, seed.kind) + 0.02));
  if (!(alpha > p && alpha < 1.0))
    throw DomainError(DR::Precondition, "contraction_alpha must lie in (p, 1)");
  const double M = c * (1.0 - std::pow(p / alpha, 1.0 / (1.0 - p)));
  const double bound = (alpha + 1.0) / 2.0 * 1.1;

  double d0 = config.d0 > 0.0 ? config.d0 : std::min(default_d0(problem), d0_cap);
  if (d0 > d0_cap)
    throw DomainError(DR::Precondition, "d0 reaches past the domain for this seed");

  PicardOutcome last;
  for (int halving = 0; halving <= config.max_halvings; ++halving, d0 *= 0.5) {
    quad::GradedPanels mesh(d0, config.panels, config.quadrature_points);
    auto ev = std::make_shared<DeadCoreEvaluator>(frame, c, mesh);
    const Eigen::MatrixXd B = ev->operator_matrix();
    last = picard([&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
                    return (B * ev->G(w)).array() - c;
                  },
                  Eigen::VectorXd::Zero(mesh.size()), config, bound, M, 1e-13 * std::max(c, 1e-3));
    if (!last.converged) continue;

    ev->set_solution(last.w);
    seed.d0 = d0;
    seed.evaluator = ev;
    auto& cert = seed.certificate;
    cert.iterations = last.iterations;
    cert.halvings = halving;
    cert.contraction_ratio = last.worst_ratio;
    cert.ratio_bound = bound;
    cert.sup_w = last.sup_w;
    cert.M_bound = M;
    cert.last_increment = last.last;
    // w(0) from the interpolant of the first panel.
    cert.w_at_zero = mesh.interpolate(last.w, 0.0);
    fill_profile(seed, *ev, mesh.nodes(), last.w);
    certify_residual(frame, *ev, d0, cert);
    return seed;
  }
  fail("deadcore_seed did not converge after " + std::to_string(config.max_halvings) +
           " halvings of d0",
       last);
}


namespace {

// ---------------------------------------------------------------------------
// Boundary seeds in v = u δ^{-β}:  (σ v')' = σ h,  σ = δ^{2β} r^{N-1},
//   h = δ^{β(p-1)} v^p - ε β (N-1)/(r δ) v,   ε = dr/dδ.

class Weight {
 public:
  Weight(const Frame& f, double beta, const quad::GradedPanels& mesh)
      : f_(f), beta_(beta), breaks_(mesh.breaks()) {
    const int P = mesh.panels();
    tail_.setZero(P + 1);
    for (int i = P - 1; i >= 1; --i) tail_(i) = tail_(i + 1) + seg(breaks_(i), breaks_(i + 1));
    if (2.0 * beta_ < 1.0) {
      head_.setZero(P + 1);
      head_(1) = head_near_zero(breaks_(1));
      for (int i = 1; i < P; ++i) head_(i + 1) = head_(i) + seg(breaks_(i), breaks_(i + 1));
    }
  }

  double sigma(double x) const { return std::pow(x, 2 * beta_) * std::pow(f_.radius(x), f_.problem.N - 1); }
  double inv(double x) const { return 1.0 / sigma(x); }

  // ∫_x^{d0} σ^{-1}
  double tail(double x) const {
    const int i = panel(x);
    if (i == 0)
      return tail_(1) + quad::integrate_geometric([&](double t) { return inv(t); }, x, breaks_(1), 24);
    return tail_(i + 1) + seg(x, breaks_(i + 1));
  }

  // ∫_0^x σ^{-1}, finite when 2β < 1
  double head(double x) const {
    if (x <= 0.0) return 0.0;
    const int i = panel(x);
    if (i == 0) return head_near_zero(x);
    return head_(i) + seg(breaks_(i), x);
  }

 private:
  int panel(double x) const {
    const Eigen::Index P = breaks_.size() - 1;
    if (x <= breaks_(1)) return 0;
    if (x >= breaks_(P - 1)) return static_cast<int>(P - 1);
    const double* b = breaks_.data();
    return static_cast<int>(std::upper_bound(b + 1, b + P, x) - b - 1);
  }

  double seg(double a, double b) const {
    return quad::integrate([&](double t) { return inv(t); }, a, b, 24);
  }

  // Leading part g(0) x^{1-2β}/(1-2β) in closed form, smooth remainder by quadrature.
  double head_near_zero(double x) const {
    const int N = f_.problem.N;
    const double g0 = std::pow(f_.anchor, 1 - N);
    const double e = 1.0 - 2.0 * beta_;
    const double rest = quad::integrate_from_zero(
        [&](double t) { return std::pow(t, -2 * beta_) * (std::pow(f_.radius(t), 1 - N) - g0); }, x,
        30, 16);
    return g0 * std::pow(x, e) / e + rest;
  }

  Frame f_;
  double beta_;
  Eigen::VectorXd breaks_;
  Eigen::VectorXd tail_, head_;
};

class BoundaryEvaluator : public detail::SeedEvaluator {
 public:
  // v(x) = v0 + L S(x) + ∫_0^x σ(s) (S(x) - S(s)) h(s) ds,  σ v' = L + ∫_0^x σ h,
  // with S = ∫_0^x σ^{-1} (singular) or -∫_x^{d0} σ^{-1} (regular).
  // The kernel is separable, so rows split into two weighted integrals.
  BoundaryEvaluator(Frame f, double beta, double v0, double L, bool regular,
                    quad::GradedPanels mesh)
      : f_(std::move(f)), beta_(beta), v0_(v0), L_(L), regular_(regular), mesh_(std::move(mesh)),
        W_(f_, beta, mesh_) {
    const int n = mesh_.size();
    sig_.resize(n);
    S_.resize(n);
    nl_.resize(n);
    lin_.resize(n);
    for (int j = 0; j < n; ++j) {
      const double s = mesh_.nodes()(j);
      sig_(j) = W_.sigma(s);
      S_(j) = S(s);
      nl_(j) = nl(s);
      lin_(j) = lin(s);
    }
  }

  double S(double x) const { return regular_ ? -W_.tail(x) : W_.head(x); }
  double nl(double s) const { return std::pow(s, beta_ * (f_.problem.p - 1.0)); }
  double lin(double s) const {
    return -f_.dir * beta_ * (f_.problem.N - 1) / (f_.radius(s) * s);
  }
  bool has_lin() const { return f_.problem.N > 1; }

  struct Rows {
    Eigen::RowVectorXd v_nl, v_lin, flux_nl, flux_lin;
    double S;
  };

  Rows rows(double x) const {
    Rows out;
    out.S = S(x);
    const Eigen::VectorXd a = sig_.cwiseProduct(nl_);
    const Eigen::VectorXd b = a.cwiseProduct(S_);
    out.flux_nl = mesh_.integration_row(x, a, [&](double s) { return W_.sigma(s) * nl(s); });
    out.v_nl = out.S * out.flux_nl -
               mesh_.integration_row(x, b, [&](double s) { return W_.sigma(s) * nl(s) * S(s); });
    if (has_lin()) {
      const Eigen::VectorXd c = sig_.cwiseProduct(lin_);
      const Eigen::VectorXd d = c.cwiseProduct(S_);
      out.flux_lin = mesh_.integration_row(x, c, [&](double s) { return W_.sigma(s) * lin(s); });
      out.v_lin = out.S * out.flux_lin -
                  mesh_.integration_row(x, d, [&](double s) { return W_.sigma(s) * lin(s) * S(s); });
    }
    return out;
  }

  void build() {
    const int n = mesh_.size();
    A_nl_.resize(n, n);
    if (has_lin()) A_lin_.resize(n, n);
    base_.resize(n);
    for (int i = 0; i < n; ++i) {
      const Rows r = rows(mesh_.nodes()(i));
      A_nl_.row(i) = r.v_nl;
      if (has_lin()) A_lin_.row(i) = r.v_lin;
      base_(i) = v0_ + L_ * r.S;
    }
  }

  Eigen::VectorXd step(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = base_ + A_nl_ * v.cwiseMax(0.0).array().pow(f_.problem.p).matrix();
    if (has_lin()) out += A_lin_ * v;
    return out;
  }

  void set_solution(const Eigen::VectorXd& v) {
    v_ = v;
    vp_ = v.cwiseMax(0.0).array().pow(f_.problem.p).matrix();
  }

  std::pair<double, double> v_and_derivative(double x) const {
    const Rows r = rows(x);
    double v = v0_ + L_ * r.S + r.v_nl.dot(vp_);
    double flux = L_ + r.flux_nl.dot(vp_);
    if (has_lin()) {
      v += r.v_lin.dot(v_);
      flux += r.flux_lin.dot(v_);
    }
    return {v, flux / W_.sigma(x)};
  }

  std::pair<double, double> eval(double d) const override {
    const auto [v, vd] = v_and_derivative(d);
    const double db = std::pow(d, beta_);
    return {db * v, beta_ * db / d * v + db * vd};
  }

 private:
  Frame f_;
  double beta_, v0_, L_;
  bool regular_;
  quad::GradedPanels mesh_;
  Weight W_;
  Eigen::VectorXd sig_, S_, nl_, lin_;
  Eigen::MatrixXd A_nl_, A_lin_;
  Eigen::VectorXd base_, v_, vp_;
};

Frame boundary_frame(const Problem& problem, Side side) {
  const int dir = side == Side::Outer ? -1 : +1;
  return Frame{problem, problem.boundary_radius(side), dir, true};
}

Seed picard_boundary_seed(const Problem& problem, Side side, double beta, double v0, double L,
                          bool regular, const PicardConfig& config) {
  Seed seed;
  seed.problem = problem;
  seed.side = side;
  const Frame frame = boundary_frame(problem, side);
  seed.anchor = frame.anchor;
  seed.direction = frame.dir;
  seed.exponent = beta;
  seed.coefficient = v0;

  double d0 = config.d0 > 0.0 ? config.d0 : default_d0(problem);
  // The nonlinear integrand behaves like s^{1+β(p-1)} at 0; grade deep enough
  // that the first panel carries less than ~1e-13.
  const double e = std::min(1.0, 2.0 + beta * (problem.p - 1.0));
  PicardOutcome last;
  for (int halving = 0; halving <= config.max_halvings; ++halving, d0 *= 0.5) {
    const int depth = static_cast<int>(std::ceil(std::log2(d0) + 13.0 * std::log2(10.0) / e));
    const int panels = std::clamp(depth, config.panels, 150);
    quad::GradedPanels mesh(d0, panels, config.quadrature_points);
    auto ev = std::make_shared<BoundaryEvaluator>(frame, beta, v0, L, regular, mesh);
    ev->build();
    last = picard([&](const Eigen::VectorXd& v) { return ev->step(v); },
                  Eigen::VectorXd::Constant(mesh.size(), v0), config, kInf, kInf,
                  1e-13 * std::max(v0, 1.0));
    if (!last.converged) continue;

    ev->set_solution(last.w);
    seed.d0 = d0;
    seed.evaluator = ev;
    auto& cert = seed.certificate;
    cert.iterations = last.iterations;
    cert.halvings = halving;
    cert.contraction_ratio = last.worst_ratio;
    cert.ratio_bound = kInf;
    cert.sup_w = last.sup_w;
    cert.M_bound = kInf;
    cert.last_increment = last.last;
    cert.w_at_zero = mesh.interpolate(last.w, 0.0) - v0;
    fill_profile(seed, *ev, mesh.nodes(), last.w);
    certify_residual(frame, *ev, d0, cert);
    return seed;
  }
  fail("boundary seed did not converge", last);
}

// ---------------------------------------------------------------------------
// Truncated expansion for β₋ < 0.

class ExpansionEvaluator : public detail::SeedEvaluator {
 public:
  ExpansionEvaluator(double beta, double beta_plus, SingularExpansion e)
      : b_(beta), bp_(beta_plus), e_(e) {}

  // (η, η')
  std::pair<double, double> eta(double d) const {
    const double K = e_.K_coeff;
    if (e_.case_tag != SingularExpansion::Case::BetaEqualMinusHalf) return {K * d * d, 2 * K * d};
    const double l = std::log(d);
    const double s = l < 0 ? -1.0 : 1.0;  // |log d|
    return {s * K * d * d * l, s * K * (2 * d * l + d)};
  }

  std::pair<double, double> eval(double d) const override {
    const auto [h, hd] = eta(d);
    const double db = std::pow(d, b_);
    const double bracket = 1.0 + e_.slope * d + h;
    const double u = db * e_.v0 * bracket + e_.C * std::pow(d, bp_);
    const double ud = b_ * db / d * e_.v0 * bracket + db * e_.v0 * (e_.slope + hd) +
                      e_.C * bp_ * std::pow(d, bp_ - 1.0);
    return {u, ud};
  }

 private:
  double b_, bp_;
  SingularExpansion e_;
};

// Integrates the radial equation in δ from d_start to d_end (either order).
std::pair<double, double> integrate_delta(const Frame& f, double d_start, double d_end, double u,
                                          double ud) {
  using DP = DormandPrince<double, 2>;
  const int N = f.problem.N;
  const double mu = f.problem.mu, p = f.problem.p;
  auto rhs = [&](double d, const DP::State& y) {
    DP::State out;
    out(0) = y(1);
    out(1) = std::pow(std::max(y(0), 0.0), p) - mu * y(0) / (d * d) - f.dir * (N - 1) / f.radius(d) * y(1);
    return out;
  };
  DP::State y(u, ud);
  const DP::State atol = 1e-14 * y.cwiseAbs().cwiseMax(1e-300);
  const double rtol = 1e-12;
  double d = d_start, h = 1e-3 * (d_end - d_start);
  typename DP::Controller ctl;
  for (int steps = 0; steps < 200000; ++steps) {
    if ((d_end - d) / h <= 1.0 + 1e-12) h = d_end - d;
    const auto trial = DP::attempt(rhs, d, y, h);
    const double err = DP::error_norm(trial, y, atol, rtol);
    if (err <= 1.0) {
      d += h;
      y = trial.y;
      if (d == d_end) return {y(0), y(1)};
      h = ctl.next(h, err, true);
    } else {
      h = ctl.next(h, err, false);
    }
  }
  throw ConvergenceError("expansion validation: integrator step limit");
}

constexpr double kExpansionTol = 1e-6;

Seed expansion_seed(const Problem& problem, Side side, double v0, double C,
                    const PicardConfig& config) {
  const auto [beta, beta_plus] = indicial_exponents(problem.mu);
  const int N = problem.N;
  const Frame frame = boundary_frame(problem, side);
  const double rb = frame.anchor;

  SingularExpansion e;
  e.v0 = v0;
  e.C = C;
  e.slope = -frame.dir * (N - 1) / (2.0 * rb);
  const double brace = (N - 1.0) * (N - 1.0) / 2.0 + beta * (N - 1) + beta * (N - 1.0) * (N - 1.0) / 2.0;
  e.A_const = v0 * std::pow(rb, N - 3) * brace;
  if (std::abs(beta + 0.5) < 1e-14) {
    e.case_tag = SingularExpansion::Case::BetaEqualMinusHalf;
    e.K_coeff = -brace / (2.0 * rb * rb);
  } else {
    e.case_tag = beta > -0.5 ? SingularExpansion::Case::BetaInMinusHalfZero
                             : SingularExpansion::Case::BetaBelowMinusHalf;
    e.K_coeff = brace / (2.0 * (2.0 * beta + 1.0) * rb * rb);
  }

  Seed seed;
  seed.kind = SeedKind::SingularBoundary;
  seed.problem = problem;
  seed.side = side;
  seed.anchor = rb;
  seed.direction = frame.dir;
  seed.exponent = beta;
  seed.coefficient = v0;
  seed.C = C;
  seed.expansion = e;
  seed.d0 = config.d0 > 0.0 ? config.d0 : 1e-3 * problem.length();
  auto ev = std::make_shared<ExpansionEvaluator>(beta, beta_plus, e);
  seed.evaluator = ev;

  constexpr int samples = 128;
  Eigen::VectorXd d(samples), v(samples);
  for (int i = 0; i < samples; ++i) {
    d(i) = seed.d0 * std::pow(1e-10, 1.0 - double(i) / (samples - 1));
    v(i) = ev->eval(d(i)).first * std::pow(d(i), -beta);
  }
  fill_profile(seed, *ev, d, v);

  // Inward integration from d0 to d0/2 against the expansion.
  const auto [u0, ud0] = ev->eval(seed.d0);
  const auto [u1, ud1] = integrate_delta(frame, seed.d0, 0.5 * seed.d0, u0, ud0);
  const auto [ue, ude] = ev->eval(0.5 * seed.d0);
  const double mismatch = std::max(std::abs(u1 - ue) / std::abs(ue), std::abs(ud1 - ude) / std::abs(ude));
  auto& cert = seed.certificate;
  certify_residual(frame, *ev, seed.d0, cert);
  cert.residual_rel = std::max(cert.residual_rel, mismatch);
  if (!(mismatch <= kExpansionTol)) {
    std::ostringstream msg;
    msg << "singular expansion failed validation: relative mismatch " << mismatch << " over [d0/2, d0]";
    throw ConvergenceError(msg.str(), mismatch, kExpansionTol);
  }
  return seed;
}

}  // namespace

Seed regular_seed(const Problem& problem, Side side, double w0, const PicardConfig& config) {
  problem.validate_subcritical();
  if (!(w0 > 0.0)) throw DomainError(DR::Precondition, "regular seed needs w0 > 0");
  if (!nonlinear_window(problem))
    throw DomainError(DR::RegimeNonexistent, "regular boundary regime needs mu > -mu_star");
  const double beta = indicial_exponents(problem.mu).second;
  Seed seed = picard_boundary_seed(problem, side, beta, w0, 0.0, true, config);
  seed.kind = SeedKind::RegularBoundary;
  return seed;
}

Seed singular_seed(const Problem& problem, Side side, double v0, double C,
                   const PicardConfig& config) {
  problem.validate_subcritical();
  if (!(v0 > 0.0)) throw DomainError(DR::Precondition, "singular seed needs v0 > 0");
  const double beta = indicial_exponents(problem.mu).first;
  if (beta == 0.0) throw DomainError(DR::MuZero, "beta_minus = 0 is excluded");
  problem.boundary_radius(side);  // rejects the inner side of a ball
  if (beta < 0.0) return expansion_seed(problem, side, v0, C, config);

  const double rb = problem.boundary_radius(side);
  const double L = C * std::pow(rb, problem.N - 1) * (1.0 - 2.0 * beta);
  Seed seed = picard_boundary_seed(problem, side, beta, v0, L, false, config);
  seed.kind = SeedKind::SingularBoundary;
  seed.C = C;
  return seed;
}

RadialState seed_to_state(const Seed& seed, double d) {
  const bool deadcore = seed.kind == SeedKind::DeadCoreInterior ||
                        seed.kind == SeedKind::DeadCoreBoundary ||
                        seed.kind == SeedKind::DeadCoreOrigin;
  if (!(d <= seed.d0 * (1 + 1e-12)) || d < 0.0 || (d == 0.0 && !deadcore))
    throw std::out_of_range("seed_to_state: d outside (0, d0]");
  const double r = seed.anchor + seed.direction * d;
  if (d == 0.0) return {r, 0.0, 0.0};
  double u, ud;
  if (seed.evaluator) {
    std::tie(u, ud) = seed.evaluator->eval(d);
  } else {
    // Cubic Hermite on the stored profile; leading power below the first node.
    const auto& x = seed.d;
    const Eigen::Index n = x.size();
    if (n < 2) throw DataError("seed profile too short");
    if (d <= x(0)) {
      const double q = d / x(0);
      u = seed.u(0) * std::pow(q, seed.exponent);
      ud = seed.du_dd(0) * std::pow(q, seed.exponent - 1.0);
    } else {
      const Eigen::Index i =
          std::min<Eigen::Index>(std::upper_bound(x.data(), x.data() + n, d) - x.data() - 1, n - 2);
      const double h = x(i + 1) - x(i), t = (d - x(i)) / h;
      const double y0 = seed.u(i), y1 = seed.u(i + 1);
      const double m0 = seed.du_dd(i) * h, m1 = seed.du_dd(i + 1) * h;
      const double t2 = t * t, t3 = t2 * t;
      u = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
      ud = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
            (3 * t2 - 2 * t) * m1) / h;
    }
  }
  return {r, u, seed.direction * ud};
}

}  // namespace hsl
