#include "doctest.h"

#include <cmath>

#include "hsl/asymptotics.hpp"
#include "hsl/barriers.hpp"

using namespace hsl;

namespace {

void check_ordered(const BarrierPair& pair, const DistanceModel& dm) {
  auto s = barrier_samples(dm);
  for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(pair.lower(s(i)) <= pair.upper(s(i)));
}

std::vector<bool> zero_set(const IterationResult& res) {
  std::vector<bool> z;
  for (Eigen::Index i = 0; i < res.table.size(); ++i) z.push_back(res.table.u(i) == 0.0);
  return z;
}

}  // namespace

TEST_SUITE("barriers") {

TEST_CASE("distance model") {
  auto b = distance_model(Problem{0.1, 0.5, 3, Ball{2.0}});
  CHECK(b.rho0 == 2.0);
  auto [lo, hi] = b.laplacian_bounds(0.5);
  CHECK(lo == doctest::Approx(-2 / 1.5));
  CHECK(hi == doctest::Approx(2 / 2.5));
  CHECK(distance_model(Problem{0.1, 0.5, 3, Annulus{1.0, 3.0}}).rho0 == 1.0);
  CHECK(distance_model(Problem{0.1, 0.5, 3, Annulus{1.0, 1.5}}).rho0 == 0.25);
  auto one = distance_model(Problem{0.1, 0.5, 1, Ball{1.0}}).laplacian_bounds(0.3);
  CHECK(one.first == 0.0);
  CHECK(one.second == 0.0);
}

TEST_CASE("cap location") {
  Problem pb{3.0 / 16, 0.5, 2, Ball{1.0}};
  PositiveMuParams prm;
  prm.epsilon = 0.8;
  prm.rho = 0.1;
  auto pair = build_barriers_positive_mu(pb, distance_model(pb), prm);
  auto k = std::get<UpperPosMu>(pair.upper.kind);
  CHECK(k.delta_bar == doctest::Approx(std::pow(0.25 / 1.05, 1 / 0.8) * 0.1).epsilon(1e-14));
  CHECK(k.delta_bar == doctest::Approx(0.01663).epsilon(1e-3));
  CHECK(pb.mu * std::pow(k.cap_value, 1 - pb.p) / (k.delta_bar * k.delta_bar) < 1.0);
  CHECK(pair.upper.verified_margin >= 0.0);
}

TEST_CASE("epsilon windows are strict") {
  Problem pb{3.0 / 16, 0.5, 2, Ball{1.0}};
  auto dm = distance_model(pb);
  PositiveMuParams prm;
  prm.epsilon = 0.5;  // 1 - 2β₋
  CHECK_THROWS_AS(build_barriers_positive_mu(pb, dm, prm), DomainError);
  prm.epsilon = 1.0;
  CHECK_THROWS_AS(build_barriers_positive_mu(pb, dm, prm), DomainError);
  prm = {};
  prm.epsilon_low = 0.5;
  CHECK_THROWS_AS(build_barriers_positive_mu(pb, dm, prm), DomainError);
  CHECK_THROWS_AS(build_barriers_positive_mu(Problem{-0.1, 0.5, 2, Ball{1.0}}, dm), DomainError);
}

TEST_CASE("positive mu pairs verify and are ordered") {
  for (double mu : {0.05, 0.1, 0.2})
    for (int N : {1, 2, 3}) {
      Problem pb{mu, 0.5, N, Ball{1.0}};
      auto dm = distance_model(pb);
      auto pair = build_barriers_positive_mu(pb, dm);
      CHECK(pair.upper.verified_margin >= 0.0);
      CHECK(pair.lower.verified_margin >= 0.0);
      CHECK(verify_barrier(pair.upper, pb, dm, 512) >= 0.0);
      check_ordered(pair, dm);
      auto lk = std::get<LowerPosMu>(pair.lower.kind);
      CHECK(pair.lower(lk.rho_low * 1.01) == 0.0);
      CHECK(lk.epsilon_low < 1 - 2 * indicial_exponents(mu).first);
    }
  Problem an{0.1, 0.5, 3, Annulus{0.5, 1.5}};
  auto pair = build_barriers_positive_mu(an, distance_model(an));
  CHECK(pair.upper.verified_margin >= 0.0);
  CHECK(pair.lower.verified_margin >= 0.0);
}

TEST_CASE("N = 1 margin matches the analytic residual") {
  Problem pb{0.1, 0.5, 1, Ball{1.0}};
  auto dm = distance_model(pb);
  auto pair = build_barriers_positive_mu(pb, dm);
  auto k = std::get<UpperPosMu>(pair.upper.kind);
  const double b = indicial_exponents(pb.mu).first, e = k.epsilon, mu = pb.mu;
  double analytic = 1e300, scale = 0.0;
  auto s = barrier_samples(dm);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double d = s(i), m;
    if (d < k.delta_bar) {
      // φ'' + μφ/d² = -M d^{β+ε-2} ((β+ε)(β+ε-1) + μ), since β(β-1) = -μ
      double phi = k.M * std::pow(d, b) * (std::pow(k.rho, e) - std::pow(d, e));
      double lin = -k.M * std::pow(d, b + e - 2) * ((b + e) * (b + e - 1) + mu);
      m = std::sqrt(phi) - lin;
    } else {
      m = std::sqrt(k.cap_value) - mu * k.cap_value / (d * d);
    }
    analytic = std::min(analytic, m);
    scale = std::max(scale, std::abs(m));
  }
  CHECK(analytic >= 0.0);
  CHECK(std::abs(pair.upper.verified_margin - analytic) <= 1e-6 * scale);
}

TEST_CASE("lower barrier residual vanishes in its dead region") {
  Problem pb{0.1, 0.5, 2, Ball{1.0}};
  auto dm = distance_model(pb);
  auto pair = build_barriers_positive_mu(pb, dm);
  auto lk = std::get<LowerPosMu>(pair.lower.kind);
  BarrierProfile dead = pair.lower;
  auto f = pair.lower.eval;
  // restrict to δ > 2ρ̲, where the profile is identically 0
  dead.eval = [f, lk](double d) { return d > 2 * lk.rho_low ? f(d) : 0.0; };
  CHECK(verify_barrier(dead, pb, dm) == 0.0);
}

TEST_CASE("negative mu pairs") {
  for (double mu : {-0.5, -3.0, -20.0}) {
    Problem pb{mu, 0.5, 2, Ball{1.0}};
    auto dm = distance_model(pb);
    auto pair = build_barriers_negative_mu(pb, dm);
    CHECK(pair.upper.verified_margin >= 0.0);
    CHECK(pair.lower.verified_margin >= 0.0);
    check_ordered(pair, dm);
    const double b = indicial_exponents(mu).first;
    // η increases toward the boundary, i.e. decreases in δ
    auto k = std::get<UpperNegMu>(pair.upper.kind);
    for (double d = 1e-7; d < 0.9 * k.sigma_bar; d *= 1.5) CHECK(pair.upper(d) >= pair.upper(1.5 * d));
    for (const auto& prof : {pair.upper, pair.lower}) {
      double c1 = prof(1e-7) / std::pow(1e-7, b), c2 = prof(1e-8) / std::pow(1e-8, b);
      CHECK(c2 > 0.0);
      CHECK(c1 == doctest::Approx(c2).epsilon(1e-3));
    }
    auto lk = std::get<LowerNegMu>(pair.lower.kind);
    CHECK(pair.lower(3.5 * lk.sigma_low) == 0.0);
  }
}

TEST_CASE("dead-core upper barrier") {
  Problem pb{0.1, 0.5, 2, Ball{1.0}};
  auto dm = distance_model(pb);
  auto base = build_barriers_positive_mu(pb, dm);
  for (double rho : {0.4, 0.8}) {
    auto up = build_deadcore_upper(pb, dm, base, rho);
    auto k = std::get<UpperDeadCore>(up.kind);
    CHECK(up.verified_margin >= 0.0);
    CHECK(verify_barrier(up, pb, dm) >= 0.0);
    for (double d : {rho, 1.1 * rho, 0.95}) CHECK(up(d) == 0.0);
    CHECK(up(0.9 * rho) > 0.0);
    double a = up(k.rho_tilde * (1 - 1e-9)), c = up(k.rho_tilde * (1 + 1e-9));
    CHECK(a == doctest::Approx(c).epsilon(1e-6));
    if (rho == 0.4) {
      CHECK(k.m < 1.0);  // rescaled collar profile
      CHECK(up(1e-3) == doctest::Approx(k.m * base.upper(1e-3)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(build_deadcore_upper(pb, dm, base, 1.5), DomainError);
}

TEST_CASE("monotone iteration in a ball") {
  Problem pb{0.1, 0.5, 2, Ball{1.0}};
  auto pair = build_barriers_positive_mu(pb, distance_model(pb));
  auto mesh = iteration_mesh(pb);
  auto res = monotone_iteration(pb, pair, mesh);
  CHECK(res.converged);
  CHECK(res.sweeps <= 200);
  CHECK(res.sandwiched);
  CHECK(res.residual < 1e-6 * (1 + res.max_u));
  for (Eigen::Index i = 0; i < res.table.size(); ++i) {
    double d = res.table.delta(i);
    CHECK(res.table.u(i) >= pair.lower(d) * (1 - 1e-9));
    CHECK(res.table.u(i) <= pair.upper(d) * (1 + 1e-9));
  }
  WindowPolicy w;
  w.delta_hi = 1024 * mesh.delta.minCoeff();
  auto f = classify(pb, fit_exponent(res.table, Side::Outer, w));
  CHECK(f.regime == Regime::LinearSingular);
  CHECK(f.coefficient > 0);
}

TEST_CASE("monotone iteration in an annulus and for negative mu") {
  Problem an{0.1, 0.5, 3, Annulus{0.5, 1.5}};
  auto r1 = monotone_iteration(an, build_barriers_positive_mu(an, distance_model(an)), iteration_mesh(an));
  CHECK(r1.converged);
  // at the inner boundary the leading δ^β₋ parts of Ū'' and μŪ/δ² cancel, and
  // the discrete operator misses that cancellation at O((h/δ)²), more than the
  // continuous margin near δ_min; the excess stays at that level
  CHECK(r1.barrier_defect < 1e-5);
  CHECK(r1.residual < 1e-6 * (1 + r1.max_u));
  Problem neg{-0.5, 0.5, 2, Ball{1.0}};
  auto r2 = monotone_iteration(neg, build_barriers_negative_mu(neg, distance_model(neg)), iteration_mesh(neg));
  CHECK(r2.converged);
  CHECK(r2.sandwiched);
  CHECK(r2.residual < 1e-6 * (1 + r2.max_u));
}

TEST_CASE("unordered barriers are rejected") {
  Problem pb{0.1, 0.5, 2, Ball{1.0}};
  auto pair = build_barriers_positive_mu(pb, distance_model(pb));
  std::swap(pair.lower, pair.upper);
  CHECK_THROWS_AS(monotone_iteration(pb, pair, iteration_mesh(pb, 256)), DomainError);
}

TEST_CASE("dead core grows as M shrinks") {
  Problem pb{0.1, 0.5, 2, Ball{1.0}};
  auto dm = distance_model(pb);
  auto mesh = iteration_mesh(pb);
  std::vector<bool> prev;
  for (double M : {std::ldexp(1.0, -11), std::ldexp(1.0, -12), std::ldexp(1.0, -13), std::ldexp(1.0, -14)}) {
    PositiveMuParams prm;
    prm.M = M;
    auto base = build_barriers_positive_mu(pb, dm, prm);
    BarrierPair pair{base.lower, build_deadcore_upper(pb, dm, base, 0.4)};
    auto res = monotone_iteration(pb, pair, mesh);
    REQUIRE(res.converged);
    auto z = zero_set(res);
    CHECK(std::count(z.begin(), z.end(), true) > 0);
    if (!prev.empty())
      for (std::size_t i = 0; i < z.size(); ++i)
        if (prev[i]) CHECK(z[i]);
    prev = z;
  }
}

}
