#pragma once

#include "confine/certifier.hpp"
#include "confine/config.hpp"
#include "confine/magnetic.hpp"

#include <json.hpp>

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace confine {

// Exit codes shared by every command: 0 ESA / Certified / pass, 1 NotESA / Falsified,
// 2 Inconclusive, 3 configuration error, 4 runtime failure.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitConfigError = 3;
inline constexpr int kExitRuntimeError = 4;

int exit_code(Verdict v);
int exit_code(CertificateOutcome o);

// Translation of configuration sections into library objects. Bad names or
// parameter counts raise ConfigError.
Coefficient coefficient_from(const CoefficientConfig& c);
RadialDiracProblem radial_problem_from(const ProblemConfig& p);
Domain domain_from(const ProblemConfig& p);
MagneticField2D field_from(const MagneticConfig& m);
SolverOptions solver_options_from(const NumericsConfig& n);
ClassifyOptions classify_options_from(const NumericsConfig& n);
BoundaryLayerGrid grid_from(const ProblemConfig& p, const NumericsConfig& n);

struct SweepCell {
    std::vector<double> params;  // one value per axis
    std::string verdict;         // ESA | NotESA | Boundary | Inconclusive
    std::string tag;
    double margin = 0.0;
    double seconds = 0.0;
};

struct SweepResult {
    std::string model, method;
    std::vector<std::string> names;
    std::vector<std::vector<double>> grids;
    std::map<std::string, double> fixed;
    std::vector<SweepCell> cells;  // row-major, the last axis fastest
    double seconds = 0.0;
};

// Sweep model chosen for the configured axes: power, em, pcm or chernoff.
std::string sweep_model(const SweepConfig& s);

// One cell. `params` holds every parameter the model reads; missing ones are 0.
// `steps` holds the grid step of each swept parameter and sets the width of the
// Boundary band of closed-form cells.
SweepCell evaluate_cell(const RunConfig& c, const std::string& model,
                        const std::map<std::string, double>& params,
                        const std::map<std::string, double>& steps = {});

SweepResult run_sweep(const RunConfig& c);
void write_csv(std::ostream& os, const SweepResult& r);
nlohmann::json to_json(const SweepResult& r);

struct CommandOutput {
    int exit_code = kExitPass;
    nlohmann::json report;
    std::string text;  // human-readable summary
    std::string csv;   // sweep cells or evolution diagnostics
};

CommandOutput run_classify(const RunConfig& c);
CommandOutput run_sweep_command(const RunConfig& c);
CommandOutput run_certify(const RunConfig& c);
CommandOutput run_fibers(const RunConfig& c);
CommandOutput run_evolve(const RunConfig& c);
CommandOutput run_identity_check(const RunConfig& c);

// Dispatches on c.command.
CommandOutput run_command(const RunConfig& c);

}  // namespace confine
