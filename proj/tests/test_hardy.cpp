#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "hsl/hardy.hpp"
#include "hsl/quadrature.hpp"

using namespace hsl;

namespace {

// Elementwise quadrature of the pencil, with the element split geometrically
// toward its end nearer the boundary.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> brute_pencil(const Mesh1D& m) {
  const int n = m.intervals();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n + 1), W = K;
  const auto& gl = quad::gauss_legendre(20);
  for (int k = 0; k < n; ++k) {
    const double x0 = m.nodes(k), x1 = m.nodes(k + 1), h = x1 - x0;
    const double d0 = m.delta(k), d1 = m.delta(k + 1);
    const bool toward0 = d0 < d1;
    std::vector<double> cuts{0.0};
    for (int j = 60; j >= 0; --j) cuts.push_back(std::ldexp(1.0, -j));
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
      for (int g = 0; g < gl.nodes.size(); ++g) {
        double lo = cuts[c], hi = cuts[c + 1];
        double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes(g);
        double wq = 0.5 * (hi - lo) * gl.weights(g);
        double s = toward0 ? t : 1.0 - t;
        double x = x0 + s * h, d = d0 + s * (d1 - d0);
        double w = std::pow(x, m.weight_power);
        double psi[2] = {1.0 - s, s}, dpsi[2] = {-1.0 / h, 1.0 / h};
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            K(k + a, k + b) += wq * h * w * dpsi[a] * dpsi[b];
            W(k + a, k + b) += wq * h * w * psi[a] * psi[b] / (d * d);
          }
      }
  }
  return {K.block(1, 1, n - 1, n - 1), W.block(1, 1, n - 1, n - 1)};
}

bool non_increasing(const HardyEstimate& e) {
  for (std::size_t i = 1; i < e.history.size(); ++i)
    if (e.history[i].second > e.history[i - 1].second) return false;
  return true;
}

}  // namespace

TEST_SUITE("hardy") {

TEST_CASE("mesh grading and nesting") {
  auto a = graded_mesh(-1.0, 1.0, 16, 6.0), b = graded_mesh(-1.0, 1.0, 32, 6.0);
  for (int i = 0; i <= 16; ++i) CHECK(a.nodes(i) == doctest::Approx(b.nodes(2 * i)).epsilon(1e-15));
  CHECK(a.nodes(8) == doctest::Approx(0.0));
  CHECK(a.delta(1) == doctest::Approx(std::pow(2.0 / 16, 6)));
  CHECK_THROWS_AS(graded_mesh(0.0, 1.0, 7, 2.0), DomainError);
}

TEST_CASE("assembled pencil against brute-force quadrature") {
  for (int P : {0, 2}) {
    auto m = P == 0 ? graded_mesh(-1.0, 1.0, 16, 6.0) : graded_mesh(1.0, 3.0, 16, 6.0, P);
    auto pen = assemble_hardy(m);
    auto [K, W] = brute_pencil(m);
    Eigen::MatrixXd Kd(pen.K), Wd(pen.W);
    CHECK((Kd - K).cwiseAbs().maxCoeff() <= 1e-10 * K.cwiseAbs().maxCoeff());
    CHECK((Wd - W).cwiseAbs().maxCoeff() <= 1e-10 * W.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("interval estimate at n = 4096") {
  auto e = hardy_interval(1.0, 4096);
  CHECK(e.value > 0.25);
  CHECK(e.value < 0.30);
  CHECK(e.mesh_size == 4096);
  CHECK(non_increasing(e));
  CHECK(e.history.back().first == 4096);
}

TEST_CASE("scale invariance") {
  auto a = hardy_interval(1.0, 256), b = hardy_interval(7.0, 256);
  CHECK(std::abs(a.value - b.value) <= 1e-12 * a.value);
}

TEST_CASE("graded beats uniform") {
  HardyOptions uni;
  uni.grading = 1.0;
  for (int n : {64, 256, 1024}) CHECK(hardy_interval(1.0, n).value <= hardy_interval(1.0, n, uni).value);
}

TEST_CASE("symmetric minimiser") {
  auto e = hardy_interval(1.0, 512);
  Eigen::VectorXd v = e.eigenvector / e.eigenvector.cwiseAbs().maxCoeff();
  CHECK((v - v.reverse()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("radial annulus with N = 1 is the interval") {
  auto a = hardy_annulus_radial(1.0, 3.0, 1, 256);
  auto b = hardy_interval(1.0, 256);
  CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));
}

TEST_CASE("radial annulus bounds") {
  auto thin = hardy_annulus_radial(1.0, 1.01, 3, 1024);
  CHECK(thin.value > 0.25);
  CHECK(thin.value < 0.30);
  CHECK(non_increasing(thin));
  auto wide = hardy_annulus_radial(1.0, 10.0, 3, 1024);
  CHECK(wide.value >= 0.25 - 1e-9);
  CHECK(non_increasing(wide));
  CHECK_THROWS_AS(hardy_annulus_radial(2.0, 1.0, 3, 64), DomainError);
}

TEST_CASE("comparison principle") {
  auto m = graded_mesh(-1.0, 1.0, 256, 6.0);
  Problem pb{0.1, 0.5, 1, Ball{1.0}};
  Eigen::VectorXd neg = -Eigen::VectorXd::Ones(257);
  neg(0) = neg(256) = 0.0;
  auto r0 = comparison_check(neg, m, pb);
  CHECK_FALSE(r0.positive_part_nonzero);
  CHECK(r0.verdict == ComparisonVerdict::Consistent);

  auto e = hardy_interval(1.0, 256);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(257);
  u.segment(1, 255) = e.eigenvector.cwiseAbs();
  double q = rayleigh_positive_part(u, m);
  CHECK(q == doctest::Approx(e.value).epsilon(1e-8));
  pb.mu = 0.9 * q;
  auto r1 = comparison_check(u, m, pb);
  CHECK(r1.verdict == ComparisonVerdict::Consistent);
  CHECK_FALSE(r1.certificate_holds);

  // negative control: a corrupted certificate that every positive u satisfies
  auto pen = assemble_hardy(m);
  Eigen::SparseMatrix<double> corrupt = -pen.K;
  auto r2 = comparison_check(u, m, pb, corrupt);
  CHECK(r2.certificate_holds);
  CHECK(r2.verdict == ComparisonVerdict::Violating);
}

TEST_CASE("genuine data never violates") {
  auto m = graded_mesh(0.0, 2.0, 128, 6.0);
  auto pen = assemble_hardy(m);
  for (double mu : {0.05, 0.15, 0.24})
    for (int k = 1; k < 8; ++k) {
      // u = sin(kπx/2), mixed signs for k > 1
      Eigen::VectorXd u(129);
      for (int i = 0; i <= 128; ++i) u(i) = std::sin(k * M_PI * m.nodes(i) / 2);
      u(0) = u(128) = 0.0;
      auto r = comparison_check(u, m, Problem{mu, 0.5, 1, Ball{1.0}});
      CHECK(r.verdict == ComparisonVerdict::Consistent);
    }
}

}
