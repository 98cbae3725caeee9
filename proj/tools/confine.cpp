#include "confine/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Flags {
    std::string config;
    std::vector<std::string> set;
    std::optional<int> jobs;
    std::optional<std::string> out;
    bool json = false;
    std::optional<double> delta_min, delta0, tol;
    bool dump_config = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "TOML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", f.set, "override one key, e.g. --set numerics.rtol=1e-12 (repeatable)");
    sub->add_option("--jobs", f.jobs, "worker threads (default: logical CPU count)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", f.out, "write the report (CSV for sweep and evolve) to this path");
    sub->add_flag("--json", f.json, "print the JSON report instead of the summary");
    sub->add_option("--delta-min", f.delta_min, "closest approach to an endpoint, relative to the interval");
    sub->add_option("--delta0", f.delta0, "outer radius of the boundary layer");
    sub->add_option("--tol", f.tol, "relative and absolute ODE tolerance");
    sub->add_flag("--dump-config", f.dump_config, "print the resolved configuration as TOML and exit");
}

confine::RunConfig resolve(const std::string& command, const Flags& f) {
    confine::RunConfig c = f.config.empty() ? confine::RunConfig{} : confine::RunConfig::load(f.config);
    c.command = command;
    for (const auto& kv : f.set) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw confine::ConfigError("--set expects key=value, got '" + kv + "'");
        c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (f.jobs) c.numerics.jobs = *f.jobs;
    if (f.out) c.output.path = *f.out;
    if (f.json) c.output.json = true;
    if (f.delta_min) c.numerics.delta_min = *f.delta_min;
    if (f.delta0) c.numerics.grid_delta0 = *f.delta0;
    if (f.tol) c.numerics.rtol = c.numerics.atol = *f.tol;
    return c;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    os << body;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Essential self-adjointness and endpoint classification of Dirac operators"};
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"classify", "limit point / limit circle classification of a one-dimensional problem"},
        {"sweep", "verdict map over one or two parameter axes (CSV)"},
        {"certify", "boundary-layer certificate for a scalar potential"},
        {"fibers", "partial-wave verdicts for a rotationally symmetric magnetic field"},
        {"evolve", "Crank-Nicolson evolution of a wavepacket on one fiber"},
        {"identity-check", "finite-difference residuals of the operator identities"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : confine::kExitConfigError;
    }

    std::string command = app.get_subcommands().front()->get_name();
    try {
        confine::RunConfig config = resolve(command, flags);
        if (flags.dump_config) {
            std::cout << config.to_toml();
            return 0;
        }
        confine::CommandOutput out = confine::run_command(config);
        std::string report = out.report.dump(2) + "\n";
        bool tabular = command == "sweep" || command == "evolve";
        const std::string& path = config.output.path;
        if (!path.empty()) {
            write_file(path, tabular ? out.csv : report);
            if (tabular) write_file(path + ".json", report);
        }
        if (config.output.json) {
            std::cout << report;
        } else if (command == "sweep" && path.empty()) {
            std::cout << out.csv;
            std::cerr << out.text;
        } else {
            std::cout << out.text;
        }
        return out.exit_code;
    } catch (const confine::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return confine::kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "rejected input: " << e.what() << '\n';
        return confine::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << command << " failed: " << e.what() << '\n';
        return confine::kExitRuntimeError;
    }
}
