#pragma once

#include "confine/classifier.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace confine {

// Rotationally symmetric field B(r) = d A2/dx1 - d A1/dx2 on the unit disk.
class MagneticField2D {
public:
    enum class Kind { Constant, CriticalFamily, BoundaryPower, Tabulated };

    static MagneticField2D constant(double b0);
    // alpha / (1 - r)^2
    static MagneticField2D critical_family(double alpha);
    // lambda (2 - r) / (1 - r)^2, whose transversal gauge is lambda r / (1 - r)
    static MagneticField2D boundary_power(double lambda);
    // natural cubic spline in r^2 through (r_k, b_k), constant beyond the grid
    static MagneticField2D tabulated(std::vector<double> r, std::vector<double> b);

    Kind kind() const { return kind_; }
    double operator()(double r) const;
    double parameter() const { return param_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::string describe() const;

private:
    Kind kind_ = Kind::Constant;
    double param_ = 0.0;
    std::vector<double> grid_, values_;
    std::optional<Coefficient> spline_;
};

struct TransversalGauge {
    std::function<double(double)> a;  // a(r) with a(0) = 0
    bool analytic = true;             // false: assembled by quadrature
    MagneticField2D field = MagneticField2D::constant(0.0);

    double operator()(double r) const { return a(r); }
    // a(r) as a radial coefficient on (0, 1) with its boundary asymptotics
    Coefficient as_coefficient() const;
};

// a(r) = (1/r) * integral_0^r y B(y) dy
TransversalGauge transversal_gauge(const MagneticField2D& b);

// B(r) = a/r + a'(r), by finite differences on the gauge alone
std::function<double(double)> field_from_gauge(const TransversalGauge& g);

double half_integer_momentum(int j);  // (2j + 1) / 2

// sigma_2 D_r + sigma_1 (a(r) - m_j / r) + sigma_3 v_s + v_e on (0, 1)
RadialDiracProblem fiber_problem(const TransversalGauge& g, int j,
                                 const std::optional<Coefficient>& v_s = std::nullopt,
                                 const std::optional<Coefficient>& v_e = std::nullopt);

// Free Dirac operator on the plane: m_j = (2j - 1) / 2 on (0, infinity).
RadialDiracProblem free_plane_fiber(int j);

// Fibers of sigma_1 (D1 - A1) + sigma_2 (D2 - A2) + sigma_3 xi on the cylinder
// cross-section; xi enters as a constant mass.
RadialDiracProblem cylinder_fiber(const TransversalGauge& g, int j, double xi);

struct FiberRow {
    int j = 0;
    double m = 0.0;
    EsaVerdict verdict;  // left = r -> 0, right = r -> 1
};

struct FiberVerdictTable {
    std::vector<FiberRow> rows;
    int j_range = 0;
    Verdict aggregate = Verdict::Inconclusive;
    Rule rule = Rule::PartialWaves;
    std::optional<int> failing_fiber;
    // Every row has the same class at r = 1; larger |m_j| is only seen to help
    // at r = 0, so the untested fibers are covered by this observation, not a proof.
    bool boundary_classes_uniform = false;
    std::string note;
};

struct PartialWaveOptions {
    int j_range = 16;
    ClassifyOptions classify;
    bool numerical_at_boundary = false;  // force the solution count at r = 1
    int threads = 0;                     // 0: hardware concurrency
};

FiberVerdictTable partial_wave_verdict(const MagneticField2D& b, const PartialWaveOptions& opt = {},
                                       const std::optional<Coefficient>& v_s = std::nullopt,
                                       const std::optional<Coefficient>& v_e = std::nullopt);

struct BoundaryFieldCertificate {
    bool holds = false;
    std::optional<double> failure_r;
    double worst_ratio = 0.0;  // min over the grid of 2 delta^2 |B|
    std::string reason;

    explicit operator bool() const { return holds; }
};

// |B| >= 1 / (2 (1 - r)^2) with constant sign on 200 log-spaced points of 1 - r in [1e-8, delta0].
BoundaryFieldCertificate boundary_field_certificate(const MagneticField2D& b, double delta0);

// Fitted dominant exponent p of |Psi|^2 ~ (1 - r)^p at r = 1 for fiber j, and a
// bisection for the field strength where p crosses -1.
double boundary_exponent(const MagneticField2D& b, int j, const SolverOptions& opt = {});

struct TransitionBracket {
    double lo = 0.0, hi = 0.0;
    int iterations = 0;
    double estimate() const { return 0.5 * (lo + hi); }
};
TransitionBracket critical_strength_bisection(std::function<MagneticField2D(double)> family, int j,
                                              double lo, double hi, double tol,
                                              const SolverOptions& opt = {});

struct SusyResidual {
    double h = 0.0;
    double plus = 0.0;   // max |D- D+ phi - (Pi^2 - B) phi|
    double minus = 0.0;  // max |D+ D- phi - (Pi^2 + B) phi|
    std::vector<double> plus_by_function, minus_by_function;
};

// Centered finite differences on [-0.75, 0.75]^2; test functions live in r <= 0.7.
SusyResidual susy_factorization_residual(const TransversalGauge& g, double h);

struct DiamagneticCheck {
    bool holds = true;
    std::vector<double> field_term;    // |<phi, B phi>|
    std::vector<double> kinetic_term;  // ||Pi1 phi||^2 + ||Pi2 phi||^2
};

DiamagneticCheck diamagnetic_check(const TransversalGauge& g, double h);

int test_function_count();

}  // namespace confine
