#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace hsl {

/// Dormand–Prince 5(4) embedded pair with a PI step-size controller.
/// The right-hand side is any callable f(t, y) -> State.
template <typename Scalar, int Dim>
class DormandPrince {
 public:
  using State = Eigen::Matrix<Scalar, Dim, 1>;

  struct Trial {
    State y;      // fifth-order solution
    State error;  // difference to the embedded fourth-order solution
  };

  template <class F>
  static Trial attempt(F&& f, Scalar t, const State& y, Scalar h) {
    // Butcher tableau.
    constexpr Scalar c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr Scalar a21 = 1.0 / 5;
    constexpr Scalar a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr Scalar a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr Scalar a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr Scalar a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr Scalar b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr Scalar e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const State k1 = f(t, y);
    const State k2 = f(t + c2 * h, State(y + h * a21 * k1));
    const State k3 = f(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
    const State k4 = f(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 =
        f(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 =
        f(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    Trial out;
    out.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const State k7 = f(t + h, out.y);
    out.error = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return out;
  }

  /// Scaled RMS error norm.
  static Scalar error_norm(const Trial& trial, const State& y, const State& atol, Scalar rtol) {
    Scalar sum = 0;
    for (int i = 0; i < y.size(); ++i) {
      const Scalar scale = atol(i) + rtol * std::max(std::abs(y(i)), std::abs(trial.y(i)));
      const Scalar e = trial.error(i) / scale;
      sum += e * e;
    }
    return std::sqrt(sum / static_cast<Scalar>(y.size()));
  }

  /// PI controller (Hairer–Wanner constants for order 5).
  class Controller {
   public:
    Scalar next(Scalar h, Scalar err, bool accepted) {
      constexpr Scalar alpha = 0.7 / 5, beta = 0.4 / 5, safety = 0.9;
      err = std::max<Scalar>(err, 1e-10);
      Scalar factor;
      if (accepted) {
        factor = safety * std::pow(err, -alpha) * std::pow(prev_, beta);
        factor = std::clamp<Scalar>(factor, 0.2, 5.0);
        prev_ = std::max<Scalar>(err, 1e-4);
      } else {
        factor = std::clamp<Scalar>(safety * std::pow(err, -0.2), 0.1, 0.9);
      }
      return h * factor;
    }

   private:
    Scalar prev_ = 1e-4;
  };
};

}  // namespace hsl
