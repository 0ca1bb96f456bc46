#include "doctest.h"

#include <cmath>

#include "hsl/params.hpp"

using namespace hsl;

TEST_SUITE("params") {

TEST_CASE("indicial exponents at closed-form points") {
  auto [a, b] = indicial_exponents(3.0 / 16);
  CHECK(a == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(b == doctest::Approx(0.75).epsilon(1e-15));
  auto [c, d] = indicial_exponents(0.25);
  CHECK(c == 0.5);
  CHECK(d == 0.5);
  auto [e, f] = indicial_exponents(-2.0);
  CHECK(e == doctest::Approx(-1.0));
  CHECK(f == doctest::Approx(2.0));
}

TEST_CASE("no positive harmonics above 1/4") {
  try {
    indicial_exponents(0.26);
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    CHECK(err.reason() == DomainError::Reason::NoPositiveHarmonics);
  }
}

TEST_CASE("root sum and product on a grid") {
  for (int i = 0; i <= 400; ++i) {
    double mu = 0.25 - 0.05 * i;  // down to -19.75
    auto [a, b] = indicial_exponents(mu);
    CHECK(std::abs(a + b - 1.0) <= 1e-12);
    CHECK(std::abs(a * b - mu) <= 1e-12 * std::max(1.0, std::abs(mu)));
    CHECK(a <= 0.5);
    CHECK(b >= 0.5);
  }
}

TEST_CASE("mu_star values and monotone growth") {
  CHECK(mu_star(0.5) == doctest::Approx(12.0));
  CHECK(mu_star(1.0 / 3) == doctest::Approx(6.0));
  CHECK(mu_star(0.6) == doctest::Approx(20.0));
  double prev = 0.0;
  for (int i = 1; i < 100; ++i) {
    double m = mu_star(i / 100.0);
    CHECK(m > prev);
    prev = m;
  }
  CHECK(mu_star(0.999) > 1e6);
  CHECK_THROWS_AS(mu_star(0.0), DomainError);
  CHECK_THROWS_AS(mu_star(1.0), DomainError);
}

TEST_CASE("exponent record") {
  Problem pb{-6.0, 0.5, 2, Ball{1.0}};
  auto e = exponents(pb);
  CHECK(e.beta_plus == doctest::Approx(3.0));
  CHECK(e.nonlinear_exp == doctest::Approx(4.0));
  CHECK(e.order_alpha == doctest::Approx(0.5));
  CHECK(e.beta_plus < e.nonlinear_exp);
  pb.mu = 3.0 / 16;
  CHECK(exponents(pb).order_alpha == 1.0);
}

TEST_CASE("dead-core coefficients from the residual balance") {
  // u = c d^4, p = 1/2: u'' + μu/d² = (12 + μ) c d², u^p = c^{1/2} d².
  auto balance = [](double c, double base) { return base * c - std::sqrt(c); };
  Problem pb{-3.0, 0.5, 2, Ball{1.0}};
  auto c = deadcore_coefficients(pb);
  CHECK(c.c_p == doctest::Approx(1.0 / 144).epsilon(1e-14));
  REQUIRE(c.c_boundary);
  CHECK(*c.c_boundary == doctest::Approx(1.0 / 81).epsilon(1e-14));
  CHECK(std::abs(balance(c.c_p, 12.0)) < 1e-15);
  CHECK(std::abs(balance(*c.c_boundary, 9.0)) < 1e-15);
  // origin: u'' + (N-1)/r u' adds 4(N-1) to the 12
  pb.N = 3;
  CHECK(*deadcore_coefficients(pb).c_origin == doctest::Approx(1.0 / (20.0 * 20.0)));
  pb.N = 1;
  CHECK(*deadcore_coefficients(pb).c_origin == doctest::Approx(c.c_p));
}

TEST_CASE("balance vanishes and changes sign at the coefficient") {
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double base : {0.5, 2.0, 12.0, 100.0}) {
      double c = deadcore_coefficient(base, p);
      CHECK(std::abs(deadcore_balance(c, base, p)) < 1e-10 * std::pow(c, p));
      CHECK(deadcore_balance(c * (1 - 1e-6), base, p) * deadcore_balance(c * (1 + 1e-6), base, p) < 0);
    }
}

TEST_CASE("boundary coefficient undefined at or below -mu_star") {
  Problem pb{-12.0, 0.5, 2, Ball{1.0}};
  CHECK_FALSE(deadcore_coefficients(pb).c_boundary);
  pb.mu = -11.99;
  CHECK(deadcore_coefficients(pb).c_boundary);
  pb.geometry = Annulus{0.5, 1.0};
  CHECK_FALSE(deadcore_coefficients(pb).c_origin);
}

TEST_CASE("admissible regimes") {
  using R = Regime;
  Problem pb{3.0 / 16, 0.5, 2, Ball{1.0}};
  CHECK(admissible_regimes(pb) ==
        std::set<R>{R::LinearSingular, R::LinearRegular, R::Nonlinear, R::DeadCore});
  pb.mu = -20;
  CHECK(admissible_regimes(pb) == std::set<R>{R::LinearSingular, R::DeadCore});
  pb.mu = -12;
  CHECK(admissible_regimes(pb) == std::set<R>{R::LinearSingular, R::DeadCore});
}

TEST_CASE("regime sets grow with mu") {
  for (double p : {0.2, 0.5, 0.8}) {
    std::set<Regime> prev;
    for (double mu = -60.0; mu < 0.25; mu += 0.37) {
      if (std::abs(mu) < 1e-9) continue;
      auto cur = admissible_regimes(Problem{mu, p, 2, Ball{1.0}});
      for (auto r : prev) CHECK(cur.count(r) == 1);
      prev = cur;
    }
  }
}

TEST_CASE("problem validation") {
  CHECK_THROWS_AS((Problem{0.0, 0.5, 2, Ball{1.0}}.validate()), DomainError);
  CHECK_THROWS_AS((Problem{0.1, 1.0, 2, Ball{1.0}}.validate()), DomainError);
  CHECK_THROWS_AS((Problem{0.1, 0.5, 0, Ball{1.0}}.validate()), DomainError);
  CHECK_THROWS_AS((Problem{0.1, 0.5, 2, Annulus{1.0, 0.5}}.validate()), DomainError);
  CHECK_THROWS_AS((Problem{0.25, 0.5, 2, Ball{1.0}}.validate_subcritical()), DomainError);
  Problem a{0.1, 0.5, 2, Annulus{0.5, 2.0}};
  CHECK(a.distance(0.6) == doctest::Approx(0.1));
  CHECK(a.distance(1.9) == doctest::Approx(0.1));
  CHECK(a.length() == doctest::Approx(1.5));
  CHECK(side_from_string(to_string(Side::Inner)) == Side::Inner);
  CHECK(regime_from_string(to_string(Regime::Nonlinear)) == Regime::Nonlinear);
}

}
