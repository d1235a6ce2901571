#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>

namespace testing {

// Dormand-Prince 5(4) with standard step control; integrates x from t0 to t1
// in place. Written independently of the library integrator.
inline void dopri45(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, Eigen::VectorXd& x,
                    double t0, double t1, double rtol = 1e-11, double atol = 1e-13) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;

    double t = t0;
    double h = std::min(1e-3, t1 - t0);
    while (t < t1 - 1e-15) {
        h = std::min(h, t1 - t);
        const Eigen::VectorXd k1 = f(x);
        const Eigen::VectorXd k2 = f(x + h * a21 * k1);
        const Eigen::VectorXd k3 = f(x + h * (a31 * k1 + a32 * k2));
        const Eigen::VectorXd k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::VectorXd k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::VectorXd k6 = f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Eigen::VectorXd y = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::VectorXd k7 = f(y);
        const Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const Eigen::ArrayXd scale = atol + rtol * x.cwiseAbs().cwiseMax(y.cwiseAbs()).array();
        const double en = std::sqrt((err.array() / scale).square().mean());
        if (en <= 1.0) {
            t += h;
            x = y;
        }
        const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h *= factor;
    }
}

} // namespace testing
