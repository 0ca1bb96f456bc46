#pragma once

#include <Eigen/Dense>
#include <functional>

namespace hsl::quad {

/// Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Cached n-point rule (Newton iteration on P_n, accurate to ~1e-15).
const GaussLegendre& gauss_legendre(int n);

/// ∫_a^b f with an n-point rule on a single interval.
double integrate(const std::function<double(double)>& f, double a, double b, int n = 16);

/// ∫_a^b f over panels that double in length starting from a > 0.
/// Suited to integrands with algebraic behaviour at 0 when a is small.
double integrate_geometric(const std::function<double(double)>& f, double a, double b,
                           int n = 16);

/// ∫_0^b f over `levels` geometrically graded panels refined toward 0.
double integrate_from_zero(const std::function<double(double)>& f, double b, int levels = 40,
                           int n = 16);

/// Composite Gauss–Legendre nodes on panels [t_{i-1}, t_i], t_0 = 0,
/// t_i = d0 * ratio^{P-i}. Functions are represented by their values at the
/// nodes and interpolated panelwise by Lagrange polynomials.
class GradedPanels {
 public:
  GradedPanels(double d0, int panels, int points, double ratio = 0.5);

  int size() const { return static_cast<int>(nodes_.size()); }
  int panels() const { return panels_; }
  int points() const { return points_; }
  double d0() const { return d0_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& breaks() const { return breaks_; }

  int panel_of(double x) const;

  /// Row ℓ with ℓ·f = interpolant of the nodal values f at x ∈ [0, d0].
  Eigen::RowVectorXd interpolation_row(double x) const;
  double interpolate(const Eigen::VectorXd& f, double x) const {
    return interpolation_row(x).dot(f);
  }

  /// Row q with q·h ≈ ∫_0^x k(s) h(s) ds, h given at the nodes. On the panel
  /// touching 0 the rule is taken in y = (s/b)^{1/3}, so k may behave like
  /// s^γ or s log s there.
  Eigen::RowVectorXd integration_row(double x, const std::function<double(double)>& k) const;
  /// Same, with k already tabulated at the nodes; k is then only called on
  /// the first panel and the partial panel containing x.
  Eigen::RowVectorXd integration_row(double x, const Eigen::VectorXd& k_nodes,
                                     const std::function<double(double)>& k) const;

  /// Nyström matrix of the Volterra operator h ↦ ∫_0^{x_i} K(s, x_i) h(s) ds
  /// evaluated at every node x_i.
  Eigen::MatrixXd volterra_matrix(const std::function<double(double, double)>& kernel) const;

 private:
  double d0_;
  int panels_;
  int points_;
  Eigen::VectorXd breaks_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

}  // namespace hsl::quad
