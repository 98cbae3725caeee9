#pragma once

#include "confine/core.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace confine {

// (sigma_2 D + sigma_1 (a(r) - m/r + v1) + sigma_3 v3 + v0 - zeta) Psi = 0 on an interval.
struct RadialDiracProblem {
    PotentialSpec1D potential;
    std::optional<double> angular;                 // m in -m/r, requires a = 0
    std::optional<Coefficient> magnetic;           // a(r)
    std::optional<cplx> spectral_shift;            // zeta

    const Interval& domain() const { return potential.domain; }

    // Effective sigma_1 coefficient w = v1 + a(x) - m/x.
    double w(double x) const;
    EndpointAsymptotics w_asymptotics(Side s) const;
    bool w_is_zero() const;

    // zeta actually used: the explicit shift, or 0 when v0 vanishes and i
    // otherwise. Infinite endpoints always use i (see resolve_shift).
    cplx resolve_shift(Side s) const;

    // Psi' = A(x) Psi
    Eigen::Matrix2cd system_matrix(double x, cplx zeta) const;

    void validate() const;
};

struct SolverOptions {
    double delta_min = 1e-8;       // relative to the interval length
    double rtol = 1e-10;
    double atol = 1e-10;
    double max_log_step = 0.1;     // step in -ln(delta)
    double infinity_reach = 60.0;  // x - a reached at an infinite endpoint
    double fit_decades = 2.0;
    // Exclusion band around the critical exponent -1. The band shrinks from
    // `margin` toward `min_margin` when the local exponent is stable across the
    // two fit decades (no visible log correction); min_margin = margin gives a
    // fixed band.
    double margin = 0.05;
    double min_margin = 0.005;
    int min_fit_samples = 16;
};

struct LogAmplitudeTrajectory {
    Side endpoint = Side::Right;
    bool complete = false;
    std::vector<double> x;
    std::vector<double> distance;      // distance to the endpoint in the integration chart
    std::vector<double> log_jacobian;  // ln |dx/d(distance)|, zero at finite endpoints
    std::vector<double> rho;
    std::vector<Eigen::Vector2cd> u;
    std::string note;

    size_t size() const { return x.size(); }
};

LogAmplitudeTrajectory integrate_to_endpoint(const RadialDiracProblem& p, double x0,
                                             const Eigen::Vector2cd& psi0, Side endpoint,
                                             const SolverOptions& opt = {});

enum class TailVerdict { SquareIntegrable, NotSquareIntegrable, Inconclusive };
const char* to_string(TailVerdict v);

struct TailClass {
    TailVerdict verdict = TailVerdict::Inconclusive;
    double exponent = 0.0;  // p in |Psi|^2 ~ delta^p
    double ci_low = 0.0, ci_high = 0.0;
    int samples = 0;
    double decades = 0.0;
    double drift = 0.0;             // |p(inner decade) - p(outer decade)|
    double effective_margin = 0.0;
    bool near_critical = false;  // |p + 1| < 0.1
    std::string note;
};

TailClass tail_l2_class(const LogAmplitudeTrajectory& t, const SolverOptions& opt = {});

struct L2Count {
    int count = 0;
    bool inconclusive = false;
    std::array<TailClass, 2> tails;  // dominant, subdominant
    std::array<LogAmplitudeTrajectory, 2> trajectories;
    cplx zeta{0.0, 0.0};
    double max_orthogonality_defect = 0.0;
};

L2Count count_l2_solutions(const RadialDiracProblem& p, Side endpoint, const SolverOptions& opt = {});

}  // namespace confine
