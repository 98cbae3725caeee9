#pragma once

#include "confine/radial.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace confine {

// Extra wall term at the cut. Reflecting adds nothing; PhaseShifted adds
// wall_phase / h on the upper component of both end nodes, which changes the
// reflection phase of anything that reaches the cut.
enum class BoundaryVariant { Reflecting, PhaseShifted };
const char* to_string(BoundaryVariant b);

struct FiberGridOptions {
    int n = 4096;            // upper-component nodes
    double delta_cut = 1e-4;
    BoundaryVariant boundary = BoundaryVariant::Reflecting;
    double wall_phase = 1.0;
};

// sigma_2 D + sigma_1 w + sigma_3 v3 + v0 on [a + delta_cut, b - delta_cut].
// The upper component lives on N uniform nodes x_n, the lower one on the N - 1
// midpoints, so the first-order part is a centred difference without doubler
// modes. Unknowns are interleaved u_0, v_0, u_1, ..., u_{N-1}; the Hamiltonian
// is real symmetric.
struct DiscretizedFiber {
    Interval domain;
    double delta_cut = 1e-4;
    double h = 0.0;
    std::vector<double> x_upper, x_lower;
    Eigen::SparseMatrix<double> hamiltonian;
    BoundaryVariant boundary = BoundaryVariant::Reflecting;

    static DiscretizedFiber build(const RadialDiracProblem& p, const FiberGridOptions& opt = {});

    int size() const { return static_cast<int>(hamiltonian.rows()); }
    double hermiticity_defect() const;  // max |H - H^T| relative to max |H|
    double norm(const Eigen::VectorXcd& psi) const;
    // Normalised Gaussian in the upper component; centre defaults to the midpoint.
    Eigen::VectorXcd gaussian_packet(std::optional<double> centre = std::nullopt,
                                     double width = 0.05) const;
    // Probability within distance `band` of either end of the domain.
    double band_probability(const Eigen::VectorXcd& psi, double band = 0.01) const;
    // Current psi^* sigma_2 psi flowing into the band at both edges.
    double band_flux(const Eigen::VectorXcd& psi, double band = 0.01) const;
    // Largest spinor amplitude on the four outermost sites at either end.
    double cut_amplitude(const Eigen::VectorXcd& psi) const;
};

struct EvolutionOptions {
    double sample_interval = 0.01;
    double band = 0.01;
};

struct EvolutionDiagnostics {
    std::vector<double> times, norm, band_prob, flux, cut_amp;
    double max_step_drift = 0.0;  // max |norm_{k+1} - norm_k| over all steps
    double total_drift = 0.0;     // |norm(T) - norm(0)|
    long steps = 0;
};

struct EvolutionRun {
    EvolutionDiagnostics diagnostics;
    Eigen::VectorXcd final_state;
};

// (1 + i dt H/2) psi_next = (1 - i dt H/2) psi with one sparse LU factorisation.
EvolutionRun crank_nicolson_evolve(const DiscretizedFiber& f, const Eigen::VectorXcd& psi0,
                                   double t_end, double dt, const EvolutionOptions& opt = {});

void write_csv(std::ostream& os, const EvolutionDiagnostics& d);

struct ProbeOptions {
    FiberGridOptions grid;
    double t_end = 3.0;
    double dt = 1e-3;
    std::optional<double> centre;
    double width = 0.05;
    double sample_interval = 0.01;
};

struct ExtensionProbe {
    double divergence = 0.0;  // max over sampled times of ||Psi_A(t) - Psi_B(t)||
    std::vector<double> times, difference;
    double max_cut_amplitude = 0.0;
};

// Evolves the same packet with the Reflecting and PhaseShifted walls. A large value
// shows that the dynamics depends on the boundary condition; for an essentially
// self-adjoint fiber it should shrink as the cut moves toward the boundary.
ExtensionProbe extension_dependence_probe(const RadialDiracProblem& p, const ProbeOptions& opt = {});

}  // namespace confine
