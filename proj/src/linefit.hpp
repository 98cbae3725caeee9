#pragma once

#include <cmath>
#include <vector>

namespace confine::detail {

// Ordinary least squares y = slope x + intercept.
struct LineFit {
    double slope = 0.0, intercept = 0.0, stderr_slope = 0.0;
    int n = 0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    f.n = static_cast<int>(xs.size());
    if (f.n < 3) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double Sxx = sxx - sx * sx / f.n;
    f.slope = (sxy - sx * sy / f.n) / Sxx;
    f.intercept = (sy - f.slope * sx) / f.n;
    double ss = 0;
    for (int i = 0; i < f.n; ++i) {
        double r = ys[i] - (f.slope * xs[i] + f.intercept);
        ss += r * r;
    }
    f.stderr_slope = std::sqrt(ss / (f.n - 2) / Sxx);
    return f;
}

}  // namespace confine::detail
