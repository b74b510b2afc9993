#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace spinvar {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double first_step = 0.0;       // 0 = pick automatically
  long max_steps = 200000;
};

// Adaptive Dormand-Prince 5(4) on a complex vector. The right-hand side may
// depend on t (time-dependent rates are evaluated at the stage times).
inline Eigen::VectorXcd integrate_rk45(
    const std::function<Eigen::VectorXcd(double, const Eigen::VectorXcd&)>& f,
    Eigen::VectorXcd y, double t0, double t1, const OdeOptions& opt = {}) {
  if (t1 < t0) throw std::invalid_argument("integrate_rk45: t1 < t0");
  if (t1 == t0) return y;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // embedded 4th order
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = t0;
  double h = opt.first_step > 0 ? opt.first_step : (t1 - t0) / 100.0;
  h = std::min(h, t1 - t0);
  Eigen::VectorXcd k1 = f(t, y);

  for (long step = 0; step < opt.max_steps; ++step) {
    if (t >= t1) return y;
    h = std::min(h, t1 - t);

    const Eigen::VectorXcd k2 = f(t + c2 * h, y + h * (a21 * k1));
    const Eigen::VectorXcd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXcd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXcd k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXcd k6 =
        f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Eigen::VectorXcd y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Eigen::VectorXcd k7 = f(t + h, y5);
    const Eigen::VectorXcd err_vec =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(err_vec[i]) / scale);
    }

    if (err <= 1.0) {
      t += h;
      y = y5;
      k1 = k7;  // FSAL
    }
    const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.2, 5.0);
    h *= factor;
    if (!(h > 0.0) || !std::isfinite(h)) throw std::runtime_error("integrate_rk45: step size underflow");
  }
  throw std::runtime_error("integrate_rk45: max step count exceeded");
}

}  // namespace spinvar
