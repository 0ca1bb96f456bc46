#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <utility>
#include <vector>

#include "hsl/params.hpp"

namespace hsl {

/// Nodes x_0 < ... < x_n on [a, b] with power grading x = a + (b-a) F(i/n),
/// F(t) = (2t)^q / 2 on [0, 1/2] and symmetric. Doubling n nests the meshes.
struct Mesh1D {
  double a = 0.0, b = 1.0;
  double grading = 1.0;     // q; 1 is uniform
  Eigen::VectorXd nodes;    // x_i
  Eigen::VectorXd delta;    // distance to the nearer end, computed without cancellation
  int weight_power = 0;     // weight r^{weight_power} (N - 1 for radial problems)

  int intervals() const { return static_cast<int>(nodes.size()) - 1; }
  /// Endpoint nodes carry the Dirichlet condition.
  bool is_boundary(int i) const { return i == 0 || i == intervals(); }
};

/// n must be even (the midpoint is a node) and >= 8.
Mesh1D graded_mesh(double a, double b, int n, double grading, int weight_power = 0);

/// Stiffness K_ij = ∫ w ψ_i' ψ_j' and Hardy mass W_ij = ∫ w ψ_i ψ_j / δ² on the
/// interior nodes (size n-1), w = r^{weight_power}.
struct HardyPencil {
  Eigen::SparseMatrix<double> K;
  Eigen::SparseMatrix<double> W;
};

HardyPencil assemble_hardy(const Mesh1D& mesh);

struct HardyOptions {
  double grading = 6.0;
  int n0 = 16;        // first mesh of the refinement history
  double tol = 1e-12;  // on the Rayleigh-quotient increment
  int max_iter = 200000;
};

struct HardyEstimate {
  double value = 0.0;
  int mesh_size = 0;
  std::vector<std::pair<int, double>> history;  // (n, value)
  Eigen::VectorXd eigenvector;                  // interior nodal values at the finest mesh
  Mesh1D mesh;
};

/// Smallest eigenvalue of K u = λ W u by inverse iteration (shift 0).
std::pair<double, Eigen::VectorXd> smallest_eigenpair(const HardyPencil& pencil, double tol,
                                                      int max_iter);

/// inf ∫φ'² / ∫φ²/δ² over P1 functions vanishing at ±L.
HardyEstimate hardy_interval(double L, int n, const HardyOptions& options = {});

/// Same over radial functions on r0 < |x| < R with weight r^{N-1}.
HardyEstimate hardy_annulus_radial(double r0, double R, int N, int n,
                                   const HardyOptions& options = {});

enum class ComparisonVerdict { Consistent, Violating };

struct ComparisonResult {
  double rayleigh_of_positive_part = 0.0;  // +inf when u⁺ = 0
  bool positive_part_nonzero = false;
  bool certificate_holds = false;  // K u - μ W u <= 0 at every interior node
  ComparisonVerdict verdict = ComparisonVerdict::Consistent;
};

/// Discrete comparison principle check for nodal values `u` (full mesh,
/// zero at both ends) against μ = problem.mu.
ComparisonResult comparison_check(const Eigen::VectorXd& u, const Mesh1D& mesh,
                                  const Problem& problem, double slack = 1e-9);

/// Same with an explicit certificate operator in place of K - μ W.
ComparisonResult comparison_check(const Eigen::VectorXd& u, const Mesh1D& mesh,
                                  const Problem& problem, const Eigen::SparseMatrix<double>& certificate,
                                  double slack = 1e-9);

/// ∫ w (u⁺)'² / ∫ w (u⁺)²/δ² with u⁺ the exact positive part of the P1 function.
double rayleigh_positive_part(const Eigen::VectorXd& u, const Mesh1D& mesh);

}  // namespace hsl
