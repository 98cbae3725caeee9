#pragma once

// Dormand-Prince 5(4) single step on a dense real state.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace confine::detail {

struct DopriResult {
    Eigen::VectorXd y;
    double error = 0.0;  // scaled max-norm, accept when <= 1
};

template <class Rhs>
DopriResult dopri_step(const Rhs& f, double t, const Eigen::VectorXd& y, double h, double rtol,
                       double atol) {
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
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    Eigen::VectorXd k1 = f(t, y);
    Eigen::VectorXd k2 = f(t + c2 * h, y + h * (a21 * k1));
    Eigen::VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    Eigen::VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    Eigen::VectorXd k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    Eigen::VectorXd k6 =
        f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    DopriResult r;
    r.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Eigen::VectorXd k7 = f(t + h, r.y);
    Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double e = 0.0;
    for (int i = 0; i < y.size(); ++i) {
        double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(r.y[i]));
        e = std::max(e, std::fabs(err[i]) / sc);
    }
    r.error = std::isfinite(e) ? e : 1e300;
    return r;
}

inline double next_step(double h, double err) {
    double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
    return h * std::clamp(fac, 0.2, 5.0);
}

}  // namespace confine::detail
