#pragma once

#include <functional>
#include <string>
#include <vector>

namespace confine {

// Adaptive Gauss-Kronrod on [a, b]. Non-finite results are passed through so
// callers can decide what an overflow means.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, double* error = nullptr);

enum class IntegralKind { Divergent, Convergent, Inconclusive };
const char* to_string(IntegralKind k);

struct IntegralTest {
    IntegralKind kind = IntegralKind::Inconclusive;
    double value = 0.0;             // limit estimate when Convergent
    std::vector<double> partial;    // I_n for n = 0..refinements
    int refinements = 0;
    double tail_slope = 0.0;        // log-log slope over the last six refinements
    std::string note;
};

// Tests whether the integral of f over (0, delta0] diverges at 0. The
// argument of f is the distance to the singular endpoint.
IntegralTest improper_integral_diverges(const std::function<double(double)>& f, double delta0,
                                        int max_refinements = 40);

}  // namespace confine
