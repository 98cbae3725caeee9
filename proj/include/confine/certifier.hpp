#pragma once

#include "confine/classifier.hpp"
#include "confine/core.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace confine {

// Input refused by a certificate precondition, with the offending point if there is one.
class RejectedInput : public std::invalid_argument {
public:
    explicit RejectedInput(const std::string& what, std::optional<Point> witness = std::nullopt)
        : std::invalid_argument(what), witness_(std::move(witness)) {}
    const std::optional<Point>& witness() const { return witness_; }

private:
    std::optional<Point> witness_;
};

// Sample points near the boundary on log-spaced shells delta(x) = delta_k.
struct BoundaryLayerGrid {
    struct Shell {
        double delta = 0.0;
        std::vector<Point> points;
    };

    Domain domain = Domain::interval(0.0, 1.0);
    double delta_min = 1e-6;
    double delta0 = 0.1;
    std::vector<Shell> shells;  // delta strictly decreasing

    // angular = 0 picks the default: 2 for an interval, 1 for a half line,
    // 32 otherwise (split evenly between the two boundary components).
    static BoundaryLayerGrid make(const Domain& d, double delta_min = 1e-6, double delta0 = 0.1,
                                  int shells = 64, int angular = 0);

    std::vector<Point> all_points() const;
    std::size_t point_count() const;
    std::string describe() const;
};

enum class CertificateOutcome { Certified, Falsified, Inconclusive };
const char* to_string(CertificateOutcome o);

struct CertificateReport {
    CertificateOutcome outcome = CertificateOutcome::Inconclusive;
    Rule rule = Rule::ScalarCertificate;
    double constant = 0.0;        // c of Certified(c)
    double min_eigenvalue = 0.0;  // over the whole grid
    std::optional<Point> witness; // Falsified: point with the most negative eigenvalue
    double witness_delta = 0.0;
    std::vector<double> shell_min;  // smallest eigenvalue per shell
    std::string grid;
    std::string note;
};

using HardyFunction = std::function<double(const Point&)>;

// 1 / (4 delta^2) - h0 with h0 <= 0.
HardyFunction convex_flat_hardy(const Domain& d, double h0 = 0.0);

// Smallest eigenvalue c = 1 has to hold on the two innermost decades of shells.
inline constexpr double kCertificateFloor = 1.0;

// V^2 - (i/2)(A.grad V - grad V.A) - i[sigma(grad h), V] - sigma(grad h)^2 with h = ln delta.
CertificateReport scalar_certificate(const DiracCoefficients& op, const BoundaryLayerGrid& g);

// The same matrix plus H_h.
CertificateReport hardy_certificate(const DiracCoefficients& op, const HardyFunction& hardy,
                                  const BoundaryLayerGrid& g);

// C (H0 + V_s^2 - (i/2) sum_j [A^j, d_j V_s]) - W^2 >= 0; W is the potential of `w`
// (its kinetic part is ignored). C = 1 and C < 1 name the two branches.
CertificateReport perturbation_certificate(const DiracCoefficients& scalar_part,
                                           const DiracCoefficients& w, const HardyFunction& h0,
                                           double c, const BoundaryLayerGrid& g);

// V = lambda S / delta for the free operator's scalar structure S on a convex flat
// domain. Split as V_s + W with V_s = sgn(lambda)(|lambda| + a) S / delta certified by the
// Hardy variant and W = -sgn(lambda) a S / delta by the perturbation branch C = 1,
// where a = max(0, 2 - |lambda|).
struct DistanceThresholdCertificate {
    CertificateOutcome outcome = CertificateOutcome::Inconclusive;
    double lambda = 0.0;
    double shift = 0.0;
    CertificateReport scalar_part;
    CertificateReport perturbation;
    std::string note;
};
DistanceThresholdCertificate flat_threshold_certificate(const DiracCoefficients& free_op,
                                                        double lambda,
                                                        const BoundaryLayerGrid& g);

struct ClassMembership {
    bool member = false;
    bool inconclusive = false;
    std::optional<double> epsilon;  // largest scanned epsilon that works
    double c_lower = 0.0;     // min |v| delta^alpha
    double c_upper = 0.0;     // max |v| delta^(2 alpha - 1 - eps)
    double c_gradient = 0.0;  // max |grad v| delta^(2 alpha - eps)
    std::vector<std::string> failures;
};

// C/delta^alpha <= |v| <= C/delta^(2 alpha - 1 - eps) and |grad v| <= C/delta^(2 alpha - eps)
// for eps in {alpha - 1, (alpha - 1)/2, (alpha - 1)/4}. A bound holds when its envelope over
// the inner half of the shells has log-log slope within 0.05 of flat.
ClassMembership class_membership_alpha(const ScalarField& v, double alpha,
                                       const BoundaryLayerGrid& g);

struct MuEstimate {
    double mu = 0.0;
    std::vector<double> by_shell;  // innermost 8 shells, outermost first
    bool increasing = false;       // flagged: the limsup proxy is still growing
};

// max over the innermost 8 shells of |grad l| delta / |l|; throws RejectedInput if |l| < 1.
MuEstimate mu_estimate(const ScalarField& ell, const BoundaryLayerGrid& g);

struct IdentityResidual {
    double step = 0.0;
    double residual = 0.0;  // max over test spinors of |LHS - RHS|
    std::vector<double> lhs, rhs;
};

// Both sides of the weighted norm identity for D(-h) + i zeta with a scalar potential,
// on finite-difference grids over [-0.75, 0.75]^d (d = 1 or 2).
IdentityResidual weighted_identity_residual(const DiracCoefficients& op, const ScalarField& h,
                                         double zeta, double step);

int identity_test_function_count();

// lambda > (1 + mu)/2, or lambda >= 1/2 in the convex flat case.
bool distance_potential_verdict(double mu, double lambda, bool convex_flat);

}  // namespace confine
