#include "confine/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace confine {

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 double* error) {
    // Boost compares its error estimate in reference-interval units against a
    // tolerance in physical units, so narrow intervals recurse to full depth.
    // Integrating over [0, 1] keeps the two scales equal.
    tol = std::max(tol, 1e-11);
    double w = b - a;
    auto g = [&](double s) { return w * f(a + w * s); };
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, 1.0, 12, tol, &err);
    if (error) *error = err;
    return v;
}

const char* to_string(IntegralKind k) {
    switch (k) {
        case IntegralKind::Divergent: return "Divergent";
        case IntegralKind::Convergent: return "Convergent";
        case IntegralKind::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

double loglog_slope(const std::vector<double>& I, double delta0, int last) {
    // least squares of ln I_n against ln(1/eps_n) over the final `last` points
    int n1 = static_cast<int>(I.size()) - 1;
    int n0 = n1 - last + 1;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int n = n0; n <= n1; ++n) {
        if (!(I[n] > 0)) return std::numeric_limits<double>::quiet_NaN();
        double x = -std::log(delta0) + n * std::log(2.0);
        double y = std::log(I[n]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

IntegralTest improper_integral_diverges(const std::function<double(double)>& f, double delta0,
                                        int max_refinements) {
    IntegralTest out;
    out.partial.push_back(0.0);
    std::vector<double> pieces{0.0};
    int small_increments = 0;
    struct Overflow {};
    auto g = [&](double t) {
        double v = f(t);
        if (std::isinf(v)) throw Overflow{};
        return std::isnan(v) ? v : std::fabs(v);
    };
    for (int n = 1; n <= max_refinements; ++n) {
        double hi = delta0 * std::ldexp(1.0, -(n - 1));
        double lo = delta0 * std::ldexp(1.0, -n);
        double piece;
        out.refinements = n;
        try {
            piece = integrate(g, lo, hi, 1e-12);
        } catch (const Overflow&) {
            out.kind = IntegralKind::Divergent;
            out.partial.push_back(std::numeric_limits<double>::infinity());
            out.note = "integrand overflows at refinement " + std::to_string(n);
            return out;
        }
        if (std::isnan(piece)) {
            out.note = "quadrature failed at refinement " + std::to_string(n);
            return out;
        }
        double In = out.partial.back() + piece;
        out.partial.push_back(In);
        pieces.push_back(piece);
        if (!std::isfinite(In) || In > 1e12) {
            out.kind = IntegralKind::Divergent;
            out.note = "truncated integral exceeded 1e12";
            return out;
        }
        if (In > 0 && piece / In < 1e-8) {
            if (++small_increments >= 4) {
                out.kind = IntegralKind::Convergent;
                out.value = In;
                out.note = "relative increments below 1e-8";
                return out;
            }
        } else {
            small_increments = 0;
        }
        // Geometric tail: increments shrinking by a stable factor q < 1 sum to
        // piece * q / (1 - q).
        if (n >= 10) {
            double qmin = 2, qmax = -1;
            bool ok = true;
            for (int k = n - 5; k <= n; ++k) {
                if (!(pieces[k - 1] > 0)) {
                    ok = false;
                    break;
                }
                double q = pieces[k] / pieces[k - 1];
                qmin = std::min(qmin, q);
                qmax = std::max(qmax, q);
            }
            if (ok && qmax <= 0.99 && qmin > 0 && qmax - qmin <= 2e-3) {
                double q = pieces[n] / pieces[n - 1];
                out.kind = IntegralKind::Convergent;
                out.value = In + piece * q / (1 - q);
                out.note = "geometric tail with ratio " + std::to_string(q);
                return out;
            }
        }
    }
    if (out.partial.size() >= 7) {
        out.tail_slope = loglog_slope(out.partial, delta0, 6);
        if (out.tail_slope > 0.02) {
            out.kind = IntegralKind::Divergent;
            out.note = "log-log growth slope " + std::to_string(out.tail_slope);
            return out;
        }
    }
    out.note = "no decision after " + std::to_string(out.refinements) + " refinements";
    return out;
}

}  // namespace confine
