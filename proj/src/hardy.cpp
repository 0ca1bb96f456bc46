#include "hsl/hardy.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsl/quadrature.hpp"

namespace hsl {

Mesh1D graded_mesh(double a, double b, int n, double grading, int weight_power) {
  if (n < 8 || n % 2 != 0) throw DomainError(DomainError::Reason::Precondition, "mesh needs even n >= 8");
  if (!(b > a) || !(grading >= 1.0))
    throw DomainError(DomainError::Reason::Precondition, "mesh needs a < b and grading >= 1");
  Mesh1D m;
  m.a = a;
  m.b = b;
  m.grading = grading;
  m.weight_power = weight_power;
  m.nodes.resize(n + 1);
  m.delta.resize(n + 1);
  const double len = b - a;
  for (int i = 0; i <= n; ++i) {
    const bool left = 2 * i <= n;
    const double t = left ? double(i) / n : double(n - i) / n;
    const double d = 0.5 * len * std::pow(2.0 * t, grading);
    m.delta(i) = d;
    m.nodes(i) = left ? a + d : b - d;
  }
  return m;
}

namespace {

// One element in the local distance variable t ∈ [t1, t2], r = c0 + c1 t.
struct Element {
  double t1, t2;
  double c0, c1;
  int P;

  double weight(double t) const { return P == 0 ? 1.0 : std::pow(c0 + c1 * t, P); }

  // ∫ φ ψ w / t² for linear φ, ψ with values (fa, fb), (ga, gb) at (t1, t2).
  double mass(double fa, double fb, double ga, double gb) const {
    const double h = t2 - t1;
    if (t1 > 0.0 && h / t1 < 0.1) {
      // Smooth on the element: Gauss–Legendre.
      return quad::integrate(
          [&](double t) {
            const double s = (t - t1) / h;
            const double f = fa + (fb - fa) * s, g = ga + (gb - ga) * s;
            return f * g * weight(t) / (t * t);
          },
          t1, t2, 16);
    }
    // Closed form: the integrand is a polynomial over t².
    const double b1 = (fb - fa) / h, a1 = fa - b1 * t1;
    const double b2 = (gb - ga) / h, a2 = ga - b2 * t1;
    std::vector<double> q{a1 * a2, a1 * b2 + a2 * b1, b1 * b2};
    for (int k = 0; k < P; ++k) {
      std::vector<double> next(q.size() + 1, 0.0);
      for (std::size_t j = 0; j < q.size(); ++j) {
        next[j] += c0 * q[j];
        next[j + 1] += c1 * q[j];
      }
      q.swap(next);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (q[k] == 0.0) continue;
      double J;
      if (k == 0) {
        J = h / (t1 * t2);
      } else if (k == 1) {
        J = std::log1p(h / t1);
      } else {
        J = (std::pow(t2, double(k) - 1) - std::pow(t1, double(k) - 1)) / (double(k) - 1);
      }
      sum += q[k] * J;
    }
    return sum;
  }

  // ∫ φ' ψ' w
  double stiffness(double fa, double fb, double ga, double gb) const {
    const double h = t2 - t1;
    const double w = P == 0 ? h : quad::integrate([&](double t) { return weight(t); }, t1, t2, 16);
    return (fb - fa) * (gb - ga) / (h * h) * w;
  }
};

// Element between nodes i and i+1, oriented so that t increases; `flip` tells
// whether node i sits at t2.
Element element(const Mesh1D& m, int i, bool& flip) {
  const int n = m.intervals();
  flip = 2 * (i + 1) > n;  // right half: t = b - x
  if (!flip) return {m.delta(i), m.delta(i + 1), m.a, 1.0, m.weight_power};
  return {m.delta(i + 1), m.delta(i), m.b, -1.0, m.weight_power};
}

}  // namespace

HardyPencil assemble_hardy(const Mesh1D& mesh) {
  const int n = mesh.intervals();
  const int dim = n - 1;
  std::vector<Eigen::Triplet<double>> tk, tw;
  tk.reserve(3 * dim);
  tw.reserve(3 * dim);
  for (int i = 0; i < n; ++i) {
    bool flip;
    const Element e = element(mesh, i, flip);
    // Local hats: node i and node i+1 in t-orientation.
    const double hi_a = flip ? 0.0 : 1.0, hi_b = flip ? 1.0 : 0.0;  // ψ_i at (t1, t2)
    const double hj_a = 1.0 - hi_a, hj_b = 1.0 - hi_b;               // ψ_{i+1}
    const int nodes[2] = {i, i + 1};
    const double va[2] = {hi_a, hj_a}, vb[2] = {hi_b, hj_b};
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        const int gi = nodes[x], gj = nodes[y];
        if (mesh.is_boundary(gi) || mesh.is_boundary(gj)) continue;
        tk.emplace_back(gi - 1, gj - 1, e.stiffness(va[x], vb[x], va[y], vb[y]));
        tw.emplace_back(gi - 1, gj - 1, e.mass(va[x], vb[x], va[y], vb[y]));
      }
    }
  }
  HardyPencil out;
  out.K.resize(dim, dim);
  out.W.resize(dim, dim);
  out.K.setFromTriplets(tk.begin(), tk.end());
  out.W.setFromTriplets(tw.begin(), tw.end());
  return out;
}

std::pair<double, Eigen::VectorXd> smallest_eigenpair(const HardyPencil& pencil, double tol,
                                                      int max_iter) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(pencil.K);
  if (solver.info() != Eigen::Success) throw ConvergenceError("stiffness factorization failed");
  const Eigen::Index dim = pencil.K.rows();
  // Symmetric, positive start.
  Eigen::VectorXd x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double s = double(i + 1) / double(dim + 1);
    x(i) = std::sqrt(s * (1.0 - s));
  }
  double lambda = std::numeric_limits<double>::infinity(), prev = lambda, prev2 = lambda;
  for (int it = 0; it < max_iter; ++it) {
    x = solver.solve(pencil.W * x);
    x /= std::sqrt(x.dot(pencil.W * x));
    prev2 = prev;
    prev = lambda;
    lambda = x.dot(pencil.K * x);
    if (std::abs(lambda - prev) <= tol * lambda) {
      if (x.sum() < 0) x = -x;
      return {lambda, x};
    }
  }
  std::ostringstream msg;
  msg << "inverse iteration did not converge (Rayleigh quotient " << lambda << ")";
  throw ConvergenceError(msg.str(), std::abs(lambda - prev), std::abs(prev - prev2));
}

namespace {

HardyEstimate refine(double a, double b, int P, int n, const HardyOptions& opt) {
  if (n < 8) throw DomainError(DomainError::Reason::Precondition, "Hardy estimate needs n >= 8");
  HardyEstimate est;
  int m = std::min(opt.n0, n);
  // Walk the nested sequence n / 2^j.
  std::vector<int> sizes;
  for (int k = n; k >= m && k >= 8 && k % 2 == 0; k /= 2) sizes.insert(sizes.begin(), k);
  for (int k : sizes) {
    const Mesh1D mesh = graded_mesh(a, b, k, opt.grading, P);
    const auto [value, vec] = smallest_eigenpair(assemble_hardy(mesh), opt.tol, opt.max_iter);
    est.history.emplace_back(k, value);
    if (k == n) {
      est.value = value;
      est.mesh_size = n;
      est.eigenvector = vec;
      est.mesh = mesh;
    }
  }
  return est;
}

}  // namespace

HardyEstimate hardy_interval(double L, int n, const HardyOptions& options) {
  if (!(L > 0.0)) throw DomainError(DomainError::Reason::Precondition, "interval needs L > 0");
  return refine(-L, L, 0, n, options);
}

HardyEstimate hardy_annulus_radial(double r0, double R, int N, int n, const HardyOptions& options) {
  if (!(r0 > 0.0 && r0 < R) || N < 1)
    throw DomainError(DomainError::Reason::Precondition, "annulus needs 0 < r0 < R and N >= 1");
  return refine(r0, R, N - 1, n, options);
}

double rayleigh_positive_part(const Eigen::VectorXd& u, const Mesh1D& mesh) {
  const int n = mesh.intervals();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    bool flip;
    Element e = element(mesh, i, flip);
    double fa = flip ? u(i + 1) : u(i), fb = flip ? u(i) : u(i + 1);
    if (fa <= 0.0 && fb <= 0.0) continue;
    if (fa < 0.0 || fb < 0.0) {
      // Restrict to the positive piece; u⁺ is linear there.
      const double ts = e.t1 + fa / (fa - fb) * (e.t2 - e.t1);
      if (fa < 0.0) {
        e.t1 = ts;
        fa = 0.0;
      } else {
        e.t2 = ts;
        fb = 0.0;
      }
      if (!(e.t2 > e.t1)) continue;
    }
    num += e.stiffness(fa, fb, fa, fb);
    den += e.mass(fa, fb, fa, fb);
  }
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

ComparisonResult comparison_check(const Eigen::VectorXd& u, const Mesh1D& mesh,
                                  const Problem& problem, const Eigen::SparseMatrix<double>& certificate,
                                  double slack) {
  const int n = mesh.intervals();
  if (u.size() != n + 1) throw DomainError(DomainError::Reason::Precondition, "u must live on the mesh");
  if (u(0) != 0.0 || u(n) != 0.0)
    throw DomainError(DomainError::Reason::Precondition, "u must vanish at the boundary");
  ComparisonResult out;
  const Eigen::VectorXd ui = u.segment(1, n - 1);
  const Eigen::VectorXd c = certificate * ui;
  const double scale = std::max(1e-300, (certificate.cwiseAbs() * ui.cwiseAbs()).maxCoeff());
  out.certificate_holds = (c.array() <= 1e-12 * scale).all();
  out.positive_part_nonzero = (ui.array() > 0.0).any();
  out.rayleigh_of_positive_part = rayleigh_positive_part(u, mesh);
  if (out.certificate_holds && out.positive_part_nonzero &&
      out.rayleigh_of_positive_part > problem.mu + slack)
    out.verdict = ComparisonVerdict::Violating;
  return out;
}

ComparisonResult comparison_check(const Eigen::VectorXd& u, const Mesh1D& mesh,
                                  const Problem& problem, double slack) {
  const HardyPencil pencil = assemble_hardy(mesh);
  const Eigen::SparseMatrix<double> cert = pencil.K - problem.mu * pencil.W;
  return comparison_check(u, mesh, problem, cert, slack);
}

}  // namespace hsl
