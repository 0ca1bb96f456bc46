#include "doctest.h"

#include <cmath>

#include "hsl/quadrature.hpp"
#include "hsl/seeds.hpp"

using namespace hsl;

namespace {

// M = c(1 - (p/α)^{1/(1-p)}) for the coefficient c actually used by the seed
double ball_bound(double c, double p, double alpha) {
  return c * (1.0 - std::pow(p / alpha, 1.0 / (1.0 - p)));
}

}  // namespace

TEST_SUITE("seeds") {

TEST_CASE("Gauss-Legendre is exact for polynomials of degree 2n-1") {
  for (int n : {2, 5, 16, 64}) {
    double s = quad::integrate([n](double x) { return std::pow(x, 2 * n - 1) + std::pow(x, 2 * n - 2); },
                               0.0, 1.0, n);
    CHECK(s == doctest::Approx(1.0 / (2 * n) + 1.0 / (2 * n - 1)).epsilon(1e-13));
  }
}

TEST_CASE("graded panels resolve algebraic endpoint behaviour") {
  // ∫_0^1 s^{2/3} = 3/5
  double s = quad::integrate_from_zero([](double x) { return std::cbrt(x * x); }, 1.0);
  CHECK(s == doctest::Approx(0.6).epsilon(1e-12));
  quad::GradedPanels g(1.0, 32, 12);
  // ∫_0^x s^{1/2} ds with h = s^{1/2} tabulated
  Eigen::VectorXd h = g.nodes().array().sqrt();
  double x = 0.37;
  double q = g.integration_row(x, [](double) { return 1.0; }).dot(h);
  CHECK(q == doctest::Approx(2.0 / 3 * std::pow(x, 1.5)).epsilon(1e-12));
}

TEST_CASE("first panel handles s^g and s log s kernels") {
  quad::GradedPanels g(1.0, 20, 16);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(g.size());
  for (double x : {1e-9, 1e-5, 0.3}) {
    // ∫_0^x s^{3/7} ds and ∫_0^x s log(x/s) ds = x²/4
    double a = g.integration_row(x, [](double s) { return std::pow(s, 3.0 / 7); }).dot(one);
    CHECK(a == doctest::Approx(0.7 * std::pow(x, 10.0 / 7)).epsilon(1e-13));
    double b = g.integration_row(x, [x](double s) { return s * std::log(x / s); }).dot(one);
    CHECK(b == doctest::Approx(0.25 * x * x).epsilon(1e-13));
  }
}

TEST_CASE("origin seeds vanish at the centre for non-integer exponents") {
  for (double p : {0.2, 0.3, 0.7})
    for (int N : {1, 2, 3}) {
      auto s = deadcore_seed(Problem{0.1, p, N, Ball{1.0}}, DeadCoreOriginAt{});
      CHECK(std::abs(s.certificate.w_at_zero) <= 1e-8);
      CHECK(std::abs(s.values(0)) <= 1e-8);
    }
}

TEST_CASE("interior dead-core seed") {
  Problem pb{0.1, 0.5, 3, Annulus{0.5, 1.0}};
  for (int dir : {-1, +1}) {
    auto s = deadcore_seed(pb, DeadCoreInteriorAt{0.75}, {}, dir);
    const auto& c = s.certificate;
    CHECK(std::abs(c.w_at_zero) <= 1e-8);
    CHECK(c.contraction_ratio <= c.ratio_bound);
    CHECK(c.sup_w <= c.M_bound);
    auto st = seed_to_state(s, 0.0);
    CHECK(st.u == 0.0);
    CHECK(st.u_prime == 0.0);
    CHECK(st.r == doctest::Approx(0.75));
    // u' points away from the dead point
    CHECK(seed_to_state(s, 0.5 * s.d0).u_prime * dir > 0);
  }
}

TEST_CASE("boundary dead-core seed approaches c' d^4") {
  Problem pb{-3.0, 0.5, 2, Ball{1.0}};
  auto s = deadcore_seed(pb, DeadCoreBoundaryAt{Side::Outer});
  CHECK(s.coefficient == doctest::Approx(1.0 / 81));
  double prev = 1e300;
  for (double d : {1e-2, 1e-3, 1e-4, 1e-5}) {
    double err = std::abs(seed_to_state(s, d).u / std::pow(d, 4) - 1.0 / 81);
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev < 1e-5 / 81);  // relative correction O(d)
  CHECK(std::abs(s.certificate.w_at_zero) <= 1e-8);
  CHECK(s.certificate.sup_w <= ball_bound(s.coefficient, 0.5, [&] {
          return s.certificate.ratio_bound / 1.1 * 2 - 1;
        }()) + 1e-15);
}

TEST_CASE("boundary dead-core seed beyond -mu_star is rejected") {
  Problem pb{-12.0, 0.5, 2, Ball{1.0}};
  try {
    deadcore_seed(pb, DeadCoreBoundaryAt{Side::Outer});
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.reason() == DomainError::Reason::RegimeNonexistent);
  }
}

TEST_CASE("origin seed needs a ball") {
  CHECK_THROWS_AS(deadcore_seed(Problem{0.1, 0.5, 2, Annulus{0.5, 1.0}}, DeadCoreOriginAt{}),
                  DomainError);
  auto s = deadcore_seed(Problem{0.1, 0.5, 3, Ball{1.0}}, DeadCoreOriginAt{});
  CHECK(s.coefficient == doctest::Approx(1.0 / 400));
  CHECK(std::abs(s.certificate.w_at_zero) <= 1e-8);
}

TEST_CASE("ODE residual with 64 points per panel") {
  PicardConfig cfg;
  cfg.quadrature_points = 64;
  cfg.panels = 24;
  Problem pb{0.1, 0.5, 2, Annulus{0.5, 1.0}};
  auto s = deadcore_seed(pb, DeadCoreInteriorAt{0.7}, cfg);
  CHECK(s.certificate.residual_abs < 1e-6 * std::max(1.0, s.u.maxCoeff()));
  auto r = regular_seed(Problem{3.0 / 16, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0, cfg);
  CHECK(r.certificate.residual_abs < 1e-6 * std::max(1.0, r.u.maxCoeff()));
}

TEST_CASE("regular seed slope at mu = 3/16") {
  auto s = regular_seed(Problem{3.0 / 16, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0);
  for (double d : {1e-5, 1e-6}) {
    double w = seed_to_state(s, d).u / std::pow(d, 0.75);
    CHECK((w - 1.0) / d == doctest::Approx(0.5).epsilon(1e-3));
  }
}

TEST_CASE("regular seed order-alpha constant at mu = -6") {
  auto s = regular_seed(Problem{-6.0, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0);
  // w0^p / ((2 - β₊(1-p)) (1 + β₊(1+p))), β₊ = 3
  double target = 1.0 / ((2 - 1.5) * (1 + 4.5));
  CHECK(target == doctest::Approx(0.363636).epsilon(1e-5));
  double w = seed_to_state(s, 1e-10).u / 1e-30;
  CHECK((w - 1.0) / 1e-5 == doctest::Approx(target).epsilon(1e-2));
}

TEST_CASE("regular seed preconditions") {
  Problem pb{0.1, 0.5, 2, Ball{1.0}};
  CHECK_THROWS_AS(regular_seed(pb, Side::Outer, 0.0), DomainError);
  pb.mu = -20;
  try {
    regular_seed(pb, Side::Outer, 1.0);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.reason() == DomainError::Reason::RegimeNonexistent);
  }
}

TEST_CASE("regular seed is independent of max_iter once converged") {
  Problem pb{0.1, 0.5, 2, Ball{1.0}};
  PicardConfig a, b;
  a.max_iter = 200;
  b.max_iter = 5000;
  auto sa = regular_seed(pb, Side::Outer, 1.0, a);
  auto sb = regular_seed(pb, Side::Outer, 1.0, b);
  REQUIRE(sa.values.size() == sb.values.size());
  CHECK((sa.values - sb.values).cwiseAbs().maxCoeff() <= 2 * a.tol);
}

TEST_CASE("halving d0 keeps the leading coefficient") {
  Problem pb{-3.0, 0.5, 2, Ball{1.0}};
  PicardConfig a, b;
  a.d0 = 0.05;
  b.d0 = 0.025;
  auto sa = deadcore_seed(pb, DeadCoreBoundaryAt{Side::Outer}, a);
  auto sb = deadcore_seed(pb, DeadCoreBoundaryAt{Side::Outer}, b);
  double d = 1e-4;
  double ca = seed_to_state(sa, d).u / std::pow(d, 4), cb = seed_to_state(sb, d).u / std::pow(d, 4);
  CHECK(ca == doctest::Approx(cb).epsilon(1e-6));
}

TEST_CASE("singular seed leading coefficient") {
  auto s = singular_seed(Problem{0.1, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0, 0.0);
  double beta = indicial_exponents(0.1).first;
  for (double d : {1e-6, 1e-8})
    CHECK(seed_to_state(s, d).u * std::pow(d, -beta) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("singular seed with N = 1 has no slope term") {
  auto s = singular_seed(Problem{-0.5, 0.5, 1, Ball{1.0}}, Side::Outer, 1.0, 0.0);
  REQUIRE(s.expansion);
  CHECK(s.expansion->slope == 0.0);
  CHECK(s.expansion->A_const == 0.0);
}

TEST_CASE("singular expansion cases") {
  using C = SingularExpansion::Case;
  auto e1 = singular_seed(Problem{-0.5, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0, 0.3).expansion;
  CHECK(e1->case_tag == C::BetaInMinusHalfZero);
  auto a = singular_seed(Problem{-0.75, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0, 0.3).expansion;
  auto b = singular_seed(Problem{-0.75, 0.5, 2, Ball{1.0}}, Side::Outer, 2.0, -0.1).expansion;
  CHECK(a->case_tag == C::BetaEqualMinusHalf);
  CHECK(a->K_coeff != 0.0);
  CHECK(a->K_coeff == doctest::Approx(b->K_coeff));
  auto e3 = singular_seed(Problem{-2.0, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0, 0.3).expansion;
  CHECK(e3->case_tag == C::BetaBelowMinusHalf);
}

TEST_CASE("A vanishes at beta = -(N-1)/(N+1)") {
  // N = 3: β = -1/2, μ = -3/4.  N = 2: β = -1/3, μ = -4/9.
  auto e3 = singular_seed(Problem{-0.75, 0.5, 3, Ball{1.0}}, Side::Outer, 1.0, 0.0).expansion;
  CHECK(std::abs(e3->A_const) < 1e-14);
  auto e2 = singular_seed(Problem{-4.0 / 9, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0, 0.0).expansion;
  CHECK(std::abs(e2->A_const) < 1e-14);
  auto e4 = singular_seed(Problem{-0.75, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0, 0.0).expansion;
  CHECK(std::abs(e4->A_const) > 1e-3);
}

TEST_CASE("seed states outside the validity radius are rejected") {
  auto s = regular_seed(Problem{0.1, 0.5, 2, Ball{1.0}}, Side::Outer, 1.0);
  CHECK_THROWS(seed_to_state(s, 2 * s.d0));
  CHECK_THROWS(seed_to_state(s, -1e-3));
}

}
