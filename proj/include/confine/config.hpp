#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace confine {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line), message_(what) {}
    int line() const { return line_; }
    // the message without the line prefix
    const std::string& message() const { return message_; }

private:
    int line_;
    std::string message_;
};

// A parsed TOML document: tables, dotted keys, strings, numbers, booleans and
// (possibly nested, possibly multi-line) arrays. Inline tables, dates and
// arrays of tables are not supported.
struct TomlDocument {
    nlohmann::json root = nlohmann::json::object();
    std::map<std::string, int> lines;  // dotted key path -> defining line

    int line_of(const std::string& path) const;
};

TomlDocument parse_toml(const std::string& text);
// One TOML value, e.g. the right-hand side of --set key=value.
nlohmann::json parse_toml_value(const std::string& text);

struct CoefficientConfig {
    // zero | constant | power | endpoint_power | logarithmic | chernoff | sine | tabulated
    std::string family = "zero";
    std::vector<double> params;
    std::string side = "right";  // endpoint_power only
    std::vector<double> grid, values;  // tabulated only

    bool operator==(const CoefficientConfig&) const = default;
};

struct ProblemConfig {
    // interval | half_line | unit_disk | unit_ball | punctured_disk | annulus
    std::string domain = "interval";
    double a = 0.0;
    double b = 1.0;
    int dimension = 3;          // unit_ball only
    double inner_radius = 0.5;  // annulus only
    std::optional<double> angular;
    std::vector<double> spectral_shift;  // empty or [re, im]
    CoefficientConfig v0, v1, v2, v3;

    bool operator==(const ProblemConfig&) const = default;
};

struct MagneticConfig {
    // none | constant | critical_family | boundary_power | tabulated
    std::string field = "none";
    double strength = 0.0;
    std::vector<double> r, b;  // tabulated only
    int j_range = 16;
    bool numerical_at_boundary = false;
    double lambda_s = 0.0;  // sigma_3 lambda_s / (1 - r)
    double lambda_e = 0.0;  // lambda_e / (1 - r)
    int fiber = -1;           // bisection fiber
    std::vector<double> bracket;  // empty or [lo, hi]

    bool operator==(const MagneticConfig&) const = default;
};

struct NumericsConfig {
    double rtol = 1e-10;
    double atol = 1e-10;
    double delta_min = 1e-8;  // solver, relative to the interval length
    double max_log_step = 0.1;
    double fit_decades = 2.0;
    double margin = 0.05;
    double min_margin = 0.005;
    std::string force = "auto";  // auto | numerical
    double grid_delta_min = 1e-6;  // certificate grids
    double grid_delta0 = 0.1;
    int shells = 64;
    int angular_samples = 0;
    int jobs = 0;  // 0: logical CPU count

    bool operator==(const NumericsConfig&) const = default;
};

struct SweepAxis {
    std::string name;
    double start = 0.0, stop = 0.0, step = 0.0;

    std::vector<double> values() const;
    bool operator==(const SweepAxis&) const = default;
};

struct SweepConfig {
    std::string model = "auto";          // auto | power | em | pcm | chernoff
    std::string method = "closed_form";  // closed_form | numerical
    std::vector<SweepAxis> axes;
    std::map<std::string, double> fixed;

    bool operator==(const SweepConfig&) const = default;
};

struct CertifyConfig {
    // scalar | hardy | perturbation | flat_threshold | distance_verdict
    std::string kind = "hardy";
    std::string op = "auto";  // auto | pauli_1d | pauli_2d | dirac_3d
    double lambda = 0.5;
    double alpha = 1.0;
    std::string structure = "scalar";  // scalar | identity
    double h0 = 0.0;
    double c = 1.0;
    double w_lambda = 0.0;
    std::string w_structure = "identity";
    double mu = 0.0;
    bool convex_flat = true;

    bool operator==(const CertifyConfig&) const = default;
};

struct EvolveConfig {
    double t_end = 10.0;
    double dt = 1e-3;
    int n = 4096;
    double delta_cut = 1e-4;
    std::string boundary = "reflecting";  // reflecting | phase_shifted
    double wall_phase = 1.0;
    double width = 0.05;
    std::optional<double> centre;
    double sample_interval = 0.01;
    double band = 0.01;
    bool probe = false;

    bool operator==(const EvolveConfig&) const = default;
};

struct IdentityConfig {
    std::string check = "weighted";  // weighted | susy | diamagnetic
    // zero | sigma3_const | sigma3_x1 | sigma3_mixed | pauli1d_linear
    std::string potential = "sigma3_x1";
    std::string weight = "zero";  // zero | mixed
    double zeta = 0.0;
    std::vector<double> steps{0.02, 0.01, 0.005};
    double min_order = 1.7;

    bool operator==(const IdentityConfig&) const = default;
};

struct OutputConfig {
    std::string path;  // empty: stdout
    bool json = false;

    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    std::string command;  // classify | sweep | certify | fibers | evolve | identity-check
    ProblemConfig problem;
    MagneticConfig magnetic;
    NumericsConfig numerics;
    SweepConfig sweep;
    CertifyConfig certify;
    EvolveConfig evolve;
    IdentityConfig identity;
    OutputConfig output;

    static RunConfig from_toml(const std::string& text);
    static RunConfig load(const std::string& path);
    // Sets one dotted key, e.g. "numerics.rtol", from a TOML value string.
    void set(const std::string& dotted_key, const std::string& value);
    std::string to_toml() const;
    nlohmann::json to_json() const;

    bool operator==(const RunConfig&) const = default;
};

}  // namespace confine
