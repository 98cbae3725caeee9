#include "confine/commands.hpp"

#include "confine/evolution.hpp"
#include "confine/report.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace confine {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void need_params(const CoefficientConfig& c, std::size_t lo, std::size_t hi) {
    if (c.params.size() < lo || c.params.size() > hi)
        throw ConfigError("coefficient family '" + c.family + "' takes " + std::to_string(lo) +
                          (lo == hi ? "" : " to " + std::to_string(hi)) + " parameters, got " +
                          std::to_string(c.params.size()));
}

Side side_from(const std::string& s) {
    if (s == "left") return Side::Left;
    if (s == "right") return Side::Right;
    throw ConfigError("side must be 'left' or 'right', got '" + s + "'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json command_report(const RunConfig& c, json result) {
    return {{"command", c.command}, {"config", c.to_json()}, {"result", std::move(result)}};
}

void describe_endpoint(std::ostream& os, const char* name, const std::optional<EndpointClassification>& e) {
    if (!e) return;
    os << "  " << name << ": " << to_string(e->cls) << " via " << to_string(e->method) << " ["
       << to_string(e->rule) << "], margin " << fmt(e->margin);
    if (e->near_threshold) os << " (near threshold)";
    os << '\n';
    if (!e->note.empty()) os << "    " << e->note << '\n';
}

std::string describe(const EsaVerdict& v) {
    std::ostringstream os;
    os << "verdict: " << short_name(v.verdict) << " [" << to_string(v.rule) << "]\n";
    describe_endpoint(os, "left", v.left);
    describe_endpoint(os, "right", v.right);
    if (!v.note.empty()) os << "  note: " << v.note << '\n';
    return os.str();
}

// Smallest endpoint margin and whether any endpoint sits near its threshold.
void endpoint_margins(const EsaVerdict& v, double& margin, bool& near, bool right_only = false) {
    for (const auto* e : {&v.left, &v.right}) {
        if (right_only && e == &v.left) continue;
        if (!*e) continue;
        margin = std::min(margin, (*e)->margin);
        near = near || (*e)->near_threshold;
    }
}

std::optional<Coefficient> boundary_coefficient(double lambda) {
    if (lambda == 0.0) return std::nullopt;
    return Coefficient::power_at_endpoint(lambda, 1.0, Side::Right);
}

PartialWaveOptions partial_wave_options(const RunConfig& c) {
    PartialWaveOptions pw;
    pw.j_range = c.magnetic.j_range;
    pw.classify = classify_options_from(c.numerics);
    pw.numerical_at_boundary = c.magnetic.numerical_at_boundary;
    pw.threads = c.numerics.jobs;
    return pw;
}

const std::map<std::string, std::set<std::string>> kModelParameters = {
    {"power", {"lambda0", "lambda1", "lambda3"}},
    {"em", {"lambda_m", "lambda_e", "lambda_s"}},
    {"pcm", {"alpha"}},
    {"chernoff", {"alpha"}},
};

double param(const std::map<std::string, double>& p, const char* key) {
    auto it = p.find(key);
    return it == p.end() ? 0.0 : it->second;
}

DiracCoefficients operator_for(const std::string& name, const Domain& d) {
    std::string op = name;
    if (op == "auto") op = d.dimension() == 1 ? "pauli_1d" : d.dimension() == 2 ? "pauli_2d" : "dirac_3d";
    DiracCoefficients c = op == "pauli_1d"   ? DiracCoefficients::pauli_1d()
                          : op == "pauli_2d" ? DiracCoefficients::pauli_2d()
                          : op == "dirac_3d" ? DiracCoefficients::dirac_3d()
                                             : throw ConfigError("unknown operator '" + op + "'");
    if (c.dimension() != d.dimension())
        throw ConfigError("operator '" + op + "' does not match the " + std::to_string(d.dimension()) +
                          "-dimensional domain");
    return c;
}

HermitianMatrix structure_for(const std::string& name, const DiracCoefficients& op) {
    if (name == "scalar") return op.scalar_structure();
    if (name == "identity") return HermitianMatrix::identity(op.spinor_dimension());
    throw ConfigError("structure must be 'scalar' or 'identity', got '" + name + "'");
}

// Convergence orders between consecutive steps; empty when every residual is at roundoff.
std::vector<double> orders(const std::vector<double>& steps, const std::vector<double>& res) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < steps.size(); ++k)
        out.push_back(std::log(res[k] / res[k + 1]) / std::log(steps[k] / steps[k + 1]));
    return out;
}

}  // namespace

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::EssentiallySelfAdjoint: return kExitPass;
        case Verdict::NotEssentiallySelfAdjoint: return kExitFail;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitRuntimeError;
}

int exit_code(CertificateOutcome o) {
    switch (o) {
        case CertificateOutcome::Certified: return kExitPass;
        case CertificateOutcome::Falsified: return kExitFail;
        case CertificateOutcome::Inconclusive: return kExitInconclusive;
    }
    return kExitRuntimeError;
}

Coefficient coefficient_from(const CoefficientConfig& c) {
    const auto& p = c.params;
    if (c.family == "zero") {
        need_params(c, 0, 0);
        return Coefficient::zero();
    }
    if (c.family == "constant") {
        need_params(c, 1, 1);
        return Coefficient::constant(p[0]);
    }
    if (c.family == "power") {
        need_params(c, 2, 3);
        return Coefficient::closed_form(Family::Power, {p[0], p[1], p.size() == 3 ? p[2] : 1.0});
    }
    if (c.family == "endpoint_power") {
        need_params(c, 1, 2);
        return Coefficient::power_at_endpoint(p[0], p.size() == 2 ? p[1] : 1.0, side_from(c.side));
    }
    if (c.family == "logarithmic") {
        need_params(c, 2, 2);
        return Coefficient::closed_form(Family::Logarithmic, p);
    }
    if (c.family == "chernoff") {
        need_params(c, 1, 1);
        return Coefficient::closed_form(Family::Chernoff, p);
    }
    if (c.family == "sine") {
        need_params(c, 3, 3);
        return Coefficient::closed_form(Family::Sine, p);
    }
    if (c.family == "tabulated") {
        if (c.grid.size() < 2 || c.grid.size() != c.values.size())
            throw ConfigError("tabulated coefficient needs matching grid and values with at least 2 points");
        return Coefficient::tabulated(c.grid, c.values);
    }
    throw ConfigError("unknown coefficient family '" + c.family + "'");
}

RadialDiracProblem radial_problem_from(const ProblemConfig& p) {
    RadialDiracProblem r;
    if (p.domain == "interval")
        r.potential.domain = Interval{p.a, p.b};
    else if (p.domain == "half_line")
        r.potential.domain = Interval{p.a, std::numeric_limits<double>::infinity()};
    else
        throw ConfigError("a one-dimensional problem needs domain 'interval' or 'half_line', got '" +
                          p.domain + "'");
    r.potential.v0 = coefficient_from(p.v0);
    r.potential.v1 = coefficient_from(p.v1);
    r.potential.v2 = coefficient_from(p.v2);
    r.potential.v3 = coefficient_from(p.v3);
    r.angular = p.angular;
    if (p.spectral_shift.size() == 2)
        r.spectral_shift = cplx(p.spectral_shift[0], p.spectral_shift[1]);
    else if (!p.spectral_shift.empty())
        throw ConfigError("problem.spectral_shift must be [re, im]");
    try {
        r.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return r;
}

Domain domain_from(const ProblemConfig& p) {
    if (p.domain == "interval") return Domain::interval(p.a, p.b);
    if (p.domain == "half_line") return Domain::half_line(p.a);
    if (p.domain == "unit_disk") return Domain::unit_disk();
    if (p.domain == "unit_ball") {
        if (p.dimension < 1 || p.dimension > 3) throw ConfigError("problem.dimension must be 1, 2 or 3");
        return Domain::unit_ball(p.dimension);
    }
    if (p.domain == "punctured_disk") return Domain::punctured_unit_disk();
    if (p.domain == "annulus") {
        if (!(p.inner_radius > 0.0 && p.inner_radius < 1.0))
            throw ConfigError("problem.inner_radius must lie in (0, 1)");
        return Domain::annulus(p.inner_radius);
    }
    throw ConfigError("unknown domain '" + p.domain + "'");
}

MagneticField2D field_from(const MagneticConfig& m) {
    if (m.field == "none") return MagneticField2D::constant(0.0);
    if (m.field == "constant") return MagneticField2D::constant(m.strength);
    if (m.field == "critical_family") return MagneticField2D::critical_family(m.strength);
    if (m.field == "boundary_power") return MagneticField2D::boundary_power(m.strength);
    if (m.field == "tabulated") {
        if (m.r.size() < 2 || m.r.size() != m.b.size())
            throw ConfigError("tabulated field needs matching magnetic.r and magnetic.b with at least 2 points");
        return MagneticField2D::tabulated(m.r, m.b);
    }
    throw ConfigError("unknown magnetic field '" + m.field + "'");
}

SolverOptions solver_options_from(const NumericsConfig& n) {
    SolverOptions s;
    s.rtol = n.rtol;
    s.atol = n.atol;
    s.delta_min = n.delta_min;
    s.max_log_step = n.max_log_step;
    s.fit_decades = n.fit_decades;
    s.margin = n.margin;
    s.min_margin = n.min_margin;
    return s;
}

ClassifyOptions classify_options_from(const NumericsConfig& n) {
    ClassifyOptions c;
    c.solver = solver_options_from(n);
    if (n.force == "auto")
        c.force = ForceMethod::Auto;
    else if (n.force == "numerical")
        c.force = ForceMethod::Numerical;
    else
        throw ConfigError("numerics.force must be 'auto' or 'numerical', got '" + n.force + "'");
    return c;
}

BoundaryLayerGrid grid_from(const ProblemConfig& p, const NumericsConfig& n) {
    if (n.shells < 2) throw ConfigError("numerics.shells must be at least 2");
    if (!(n.grid_delta_min > 0.0 && n.grid_delta_min < n.grid_delta0))
        throw ConfigError("numerics.grid_delta_min must lie in (0, grid_delta0)");
    return BoundaryLayerGrid::make(domain_from(p), n.grid_delta_min, n.grid_delta0, n.shells,
                                   n.angular_samples);
}

// Classify ---------------------------------------------------------------------

CommandOutput run_classify(const RunConfig& c) {
    CommandOutput out;
    if (c.problem.domain == "real_line") {
        if (c.problem.v1.family != "chernoff" || c.problem.v1.params.size() != 1)
            throw ConfigError("domain 'real_line' is only available for problem.v1 family 'chernoff'");
        ChernoffVerdict v = chernoff_example_verdict(c.problem.v1.params[0]);
        out.exit_code = exit_code(v.verdict.verdict);
        out.report = command_report(c, to_json(v));
        std::ostringstream os;
        os << describe(v.verdict);
        os << "  square integrable: Psi+ " << (v.square_integrable[0] ? "yes" : "no") << ", Psi- "
           << (v.square_integrable[1] ? "yes" : "no") << '\n';
        out.text = os.str();
        return out;
    }
    EsaVerdict v = esa_verdict_1d(radial_problem_from(c.problem), classify_options_from(c.numerics));
    out.exit_code = exit_code(v.verdict);
    out.report = command_report(c, to_json(v));
    out.text = describe(v);
    return out;
}

// Sweep ------------------------------------------------------------------------

std::string sweep_model(const SweepConfig& s) {
    std::set<std::string> used;
    for (const auto& a : s.axes) used.insert(a.name);
    for (const auto& [k, v] : s.fixed) used.insert(k);
    std::string model = s.model;
    if (model == "auto") {
        if (s.axes.empty()) throw ConfigError("sweep needs at least one axis");
        const std::string& first = s.axes.front().name;
        model = first == "alpha" ? "pcm" : kModelParameters.at("em").count(first) ? "em" : "power";
    }
    auto it = kModelParameters.find(model);
    if (it == kModelParameters.end()) throw ConfigError("unknown sweep model '" + model + "'");
    for (const auto& u : used)
        if (!it->second.count(u))
            throw ConfigError("sweep parameter '" + u + "' does not belong to model '" + model + "'");
    return model;
}

SweepCell evaluate_cell(const RunConfig& c, const std::string& model,
                        const std::map<std::string, double>& params,
                        const std::map<std::string, double>& steps) {
    const std::string& method = c.sweep.method;
    if (method != "closed_form" && method != "numerical")
        throw ConfigError("sweep.method must be 'closed_form' or 'numerical', got '" + method + "'");
    bool numerical = method == "numerical";
    auto t0 = std::chrono::steady_clock::now();

    SweepCell cell;
    Verdict verdict = Verdict::Inconclusive;
    bool near = false;
    std::map<std::string, double> gradient;  // d margin / d parameter, closed form only

    if (model == "power") {
        double l0 = param(params, "lambda0"), l1 = param(params, "lambda1"), l3 = param(params, "lambda3");
        RadialDiracProblem p;
        p.potential.domain = Interval{0.0, 1.0};
        auto both_ends = [](double l) {
            return l == 0.0 ? Coefficient::zero() : Coefficient::closed_form(Family::Power, {l, l, 1.0});
        };
        p.potential.v0 = both_ends(l0);
        p.potential.v1 = both_ends(l1);
        p.potential.v3 = both_ends(l3);
        ClassifyOptions opt = classify_options_from(c.numerics);
        opt.force = numerical ? ForceMethod::Numerical : ForceMethod::Auto;
        EsaVerdict v = esa_verdict_1d(p, opt);
        verdict = v.verdict;
        cell.tag = to_string(v.rule);
        if (numerical) {
            cell.margin = std::numeric_limits<double>::infinity();
            endpoint_margins(v, cell.margin, near);
        } else {
            cell.margin = power_family_slack(l0, l1, l3);
            gradient = {{"lambda0", -2.0 * l0}, {"lambda1", 2.0 * l1}, {"lambda3", 2.0 * l3}};
        }
    } else if (model == "em") {
        double lm = param(params, "lambda_m"), le = param(params, "lambda_e"), ls = param(params, "lambda_s");
        if (numerical) {
            PartialWaveOptions pw = partial_wave_options(c);
            pw.numerical_at_boundary = true;
            FiberVerdictTable t = partial_wave_verdict(MagneticField2D::boundary_power(lm), pw,
                                                       boundary_coefficient(ls), boundary_coefficient(le));
            verdict = t.aggregate;
            cell.tag = to_string(t.rule);
            cell.margin = std::numeric_limits<double>::infinity();
            for (const auto& row : t.rows) endpoint_margins(row.verdict, cell.margin, near, true);
        } else {
            verdict = em_threshold_verdict(lm, ls, le) ? Verdict::EssentiallySelfAdjoint
                                                        : Verdict::NotEssentiallySelfAdjoint;
            cell.tag = to_string(Rule::MixedThreshold);
            cell.margin = lm * lm + ls * ls - 0.25 - le * le;
            gradient = {{"lambda_m", 2.0 * lm}, {"lambda_s", 2.0 * ls}, {"lambda_e", -2.0 * le}};
        }
    } else if (model == "pcm") {
        double alpha = param(params, "alpha");
        if (numerical) {
            PartialWaveOptions pw = partial_wave_options(c);
            pw.numerical_at_boundary = true;
            FiberVerdictTable t = partial_wave_verdict(MagneticField2D::critical_family(alpha), pw);
            verdict = t.aggregate;
            cell.tag = to_string(t.rule);
            cell.margin = std::numeric_limits<double>::infinity();
            for (const auto& row : t.rows) endpoint_margins(row.verdict, cell.margin, near, true);
        } else {
            bool esa = alpha >= 0.5;
            verdict = esa ? Verdict::EssentiallySelfAdjoint : Verdict::NotEssentiallySelfAdjoint;
            cell.tag = to_string(esa ? Rule::BoundaryField : Rule::CriticalField);
            cell.margin = alpha - 0.5;
            gradient = {{"alpha", 1.0}};
        }
    } else if (model == "chernoff") {
        double alpha = param(params, "alpha");
        if (numerical) {
            ChernoffVerdict v = chernoff_example_verdict(alpha);
            verdict = v.verdict.verdict;
            cell.tag = to_string(v.verdict.rule);
            cell.margin = 1.0 - alpha;
        } else {
            bool esa = alpha <= 1.0;
            verdict = esa ? Verdict::EssentiallySelfAdjoint : Verdict::NotEssentiallySelfAdjoint;
            cell.tag = to_string(Rule::ChernoffFamily);
            cell.margin = 1.0 - alpha;
            gradient = {{"alpha", -1.0}};
        }
    } else {
        throw ConfigError("unknown sweep model '" + model + "'");
    }

    if (!numerical) {
        // the threshold passes within half a grid step of this cell
        double band = 0.0;
        for (const auto& [name, step] : steps) {
            auto g = gradient.find(name);
            if (g != gradient.end()) band += 0.5 * step * std::abs(g->second);
        }
        near = std::abs(cell.margin) < band;
    } else {
        // a near-critical fit only matters when it left the cell undecided
        near = near && verdict == Verdict::Inconclusive;
    }
    cell.verdict = near ? "Boundary" : short_name(verdict);
    cell.seconds = seconds_since(t0);
    return cell;
}

SweepResult run_sweep(const RunConfig& c) {
    auto t0 = std::chrono::steady_clock::now();
    SweepResult r;
    r.model = sweep_model(c.sweep);
    r.method = c.sweep.method;
    r.fixed = c.sweep.fixed;
    if (c.sweep.axes.empty() || c.sweep.axes.size() > 2)
        throw ConfigError("sweep needs one or two axes");
    std::map<std::string, double> steps;
    std::size_t total = 1;
    for (const auto& a : c.sweep.axes) {
        r.names.push_back(a.name);
        r.grids.push_back(a.values());
        steps[a.name] = a.step;
        total *= r.grids.back().size();
    }
    r.cells.resize(total);

    // cells run on the outer pool; each one is single-threaded inside
    RunConfig inner = c;
    inner.numerics.jobs = 1;
    std::size_t inner_size = r.grids.size() == 2 ? r.grids[1].size() : 1;
    detail::parallel_for(static_cast<int>(total), c.numerics.jobs, [&](int k) {
        std::map<std::string, double> params = r.fixed;
        std::vector<double> values;
        values.push_back(r.grids[0][k / inner_size]);
        if (r.grids.size() == 2) values.push_back(r.grids[1][k % inner_size]);
        for (std::size_t i = 0; i < values.size(); ++i) params[r.names[i]] = values[i];
        SweepCell cell = evaluate_cell(inner, r.model, params, steps);
        cell.params = values;
        r.cells[k] = std::move(cell);
    });
    r.seconds = seconds_since(t0);
    return r;
}

void write_csv(std::ostream& os, const SweepResult& r) {
    os << "param1,param2,verdict,tag,margin\n";
    for (const auto& cell : r.cells) {
        os << fmt(cell.params[0]) << ',' << (cell.params.size() > 1 ? fmt(cell.params[1]) : "") << ','
           << cell.verdict << ',' << cell.tag << ',' << fmt(cell.margin) << '\n';
    }
}

// Timings are left out so the report is reproducible byte for byte.
json to_json(const SweepResult& r) {
    json axes = json::array();
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        json grid = json::array();
        for (double x : r.grids[i]) grid.push_back(json_number(x));
        axes.push_back({{"name", r.names[i]}, {"grid", grid}});
    }
    json fixed = json::object();
    for (const auto& [k, v] : r.fixed) fixed[k] = json_number(v);
    json cells = json::array();
    std::map<std::string, int> counts;
    for (const auto& c : r.cells) {
        json params = json::array();
        for (double x : c.params) params.push_back(json_number(x));
        cells.push_back({{"params", params}, {"verdict", c.verdict}, {"tag", c.tag}, {"margin", json_number(c.margin)}});
        ++counts[c.verdict];
    }
    return {{"model", r.model}, {"method", r.method}, {"axes", axes}, {"fixed", fixed},
            {"cell_count", r.cells.size()}, {"verdict_counts", counts}, {"cells", cells}};
}

CommandOutput run_sweep_command(const RunConfig& c) {
    CommandOutput out;
    SweepResult r = run_sweep(c);
    std::ostringstream csv;
    write_csv(csv, r);
    out.csv = csv.str();
    out.report = command_report(c, to_json(r));
    std::map<std::string, int> counts;
    for (const auto& cell : r.cells) ++counts[cell.verdict];
    std::ostringstream os;
    os << "sweep model " << r.model << " (" << r.method << "), " << r.cells.size() << " cells over";
    for (std::size_t i = 0; i < r.names.size(); ++i)
        os << (i ? " x " : " ") << r.names[i] << "[" << r.grids[i].size() << "]";
    os << ", " << std::fixed << std::setprecision(2) << r.seconds << " s\n";
    for (const auto& [k, n] : counts) os << "  " << k << ": " << n << '\n';
    out.text = os.str();
    return out;
}

// Certify ----------------------------------------------------------------------

CommandOutput run_certify(const RunConfig& c) {
    const CertifyConfig& k = c.certify;
    CommandOutput out;
    std::ostringstream os;

    if (k.kind == "distance_verdict") {
        bool esa = distance_potential_verdict(k.mu, k.lambda, k.convex_flat);
        Rule rule = k.convex_flat ? Rule::DistancePotentialFlat : Rule::DistancePotential;
        out.exit_code = esa ? kExitPass : kExitFail;
        out.report = command_report(c, {{"verdict", esa ? "ESA" : "NotESA"}, {"rule", to_string(rule)},
                                        {"mu", json_number(k.mu)}, {"lambda", json_number(k.lambda)},
                                        {"convex_flat", k.convex_flat}});
        os << "verdict: " << (esa ? "ESA" : "NotESA") << " [" << to_string(rule) << "] for lambda "
           << fmt(k.lambda) << ", mu " << fmt(k.mu) << '\n';
        out.text = os.str();
        return out;
    }

    Domain domain = domain_from(c.problem);
    BoundaryLayerGrid grid = grid_from(c.problem, c.numerics);
    DiracCoefficients free_op = operator_for(k.op, domain);

    if (k.kind == "class_membership") {
        ClassMembership m = class_membership_alpha(distance_power(domain, k.lambda, k.alpha), k.alpha, grid);
        out.exit_code = m.member ? kExitPass : m.inconclusive ? kExitInconclusive : kExitFail;
        out.report = command_report(c, to_json(m));
        os << "class membership (alpha " << fmt(k.alpha) << "): "
           << (m.member ? "member" : m.inconclusive ? "inconclusive" : "not a member");
        if (m.epsilon) os << ", epsilon " << fmt(*m.epsilon);
        os << '\n';
        for (const auto& f : m.failures) os << "  " << f << '\n';
        out.text = os.str();
        return out;
    }

    if (k.kind == "flat_threshold") {
        DistanceThresholdCertificate t = flat_threshold_certificate(free_op, k.lambda, grid);
        out.exit_code = exit_code(t.outcome);
        out.report = command_report(c, to_json(t));
        os << "certificate: " << to_string(t.outcome) << " [" << to_string(Rule::DistancePotentialFlat)
           << "] for lambda " << fmt(k.lambda) << ", shift " << fmt(t.shift) << '\n'
           << "  scalar part: " << to_string(t.scalar_part.outcome) << ", min eigenvalue "
           << fmt(t.scalar_part.min_eigenvalue) << '\n'
           << "  perturbation: " << to_string(t.perturbation.outcome) << ", min eigenvalue "
           << fmt(t.perturbation.min_eigenvalue) << '\n';
        if (!t.note.empty()) os << "  note: " << t.note << '\n';
        out.text = os.str();
        return out;
    }

    std::vector<PotentialTerm> terms;
    if (k.lambda != 0.0)
        terms.push_back({structure_for(k.structure, free_op), distance_power(domain, k.lambda, k.alpha)});
    DiracCoefficients op = free_op.with_potential(terms);

    CertificateReport r;
    if (k.kind == "scalar") {
        r = scalar_certificate(op, grid);
    } else if (k.kind == "hardy") {
        r = hardy_certificate(op, convex_flat_hardy(domain, k.h0), grid);
    } else if (k.kind == "perturbation") {
        std::vector<PotentialTerm> w;
        if (k.w_lambda != 0.0)
            w.push_back({structure_for(k.w_structure, free_op), distance_power(domain, k.w_lambda, 1.0)});
        r = perturbation_certificate(op, free_op.with_potential(w), convex_flat_hardy(domain, k.h0), k.c, grid);
    } else {
        throw ConfigError("unknown certificate kind '" + k.kind + "'");
    }
    out.exit_code = exit_code(r.outcome);
    out.report = command_report(c, to_json(r));
    os << "certificate: " << to_string(r.outcome) << " [" << to_string(r.rule) << "]";
    if (r.outcome == CertificateOutcome::Certified) os << ", constant " << fmt(r.constant);
    os << "\n  min eigenvalue " << fmt(r.min_eigenvalue) << " on " << r.grid << '\n';
    if (r.witness) {
        os << "  witness at delta " << fmt(r.witness_delta) << ": (";
        for (int i = 0; i < r.witness->size(); ++i) os << (i ? ", " : "") << fmt((*r.witness)[i]);
        os << ")\n";
    }
    if (!r.note.empty()) os << "  note: " << r.note << '\n';
    out.text = os.str();
    return out;
}

// Fibers -----------------------------------------------------------------------

CommandOutput run_fibers(const RunConfig& c) {
    const MagneticConfig& m = c.magnetic;
    MagneticField2D field = field_from(m);
    PartialWaveOptions pw = partial_wave_options(c);
    FiberVerdictTable t = partial_wave_verdict(field, pw, boundary_coefficient(m.lambda_s),
                                               boundary_coefficient(m.lambda_e));
    BoundaryFieldCertificate cert = boundary_field_certificate(field, c.numerics.grid_delta0);

    json result = {{"table", to_json(t)}, {"boundary_field_certificate", to_json(cert)}};
    std::ostringstream os;
    os << "field " << field.describe() << ", j in [" << -t.j_range << ", " << t.j_range - 1 << "]\n"
       << "verdict: " << short_name(t.aggregate) << " [" << to_string(t.rule) << "]";
    if (t.failing_fiber) os << ", failing fiber j = " << *t.failing_fiber;
    os << "\n  boundary field certificate: " << (cert.holds ? "holds" : "fails");
    if (!cert.reason.empty()) os << " (" << cert.reason << ")";
    os << '\n';
    int listed = 0, hidden = 0;
    for (const auto& row : t.rows) {
        if (row.verdict.verdict == Verdict::EssentiallySelfAdjoint) continue;
        if (std::abs(row.m) > 2.0) {
            ++hidden;
            continue;
        }
        ++listed;
        os << "  j = " << row.j << " (m = " << fmt(row.m) << "): " << short_name(row.verdict.verdict) << " ["
           << to_string(row.verdict.rule) << "]\n";
    }
    if (hidden) os << "  (" << hidden << " more fibers with |m| > 2 not shown" << (listed ? "" : " individually") << ")\n";
    if (!t.note.empty()) os << "  note: " << t.note << '\n';

    if (!m.bracket.empty()) {
        if (m.bracket.size() != 2 || !(m.bracket[0] < m.bracket[1]))
            throw ConfigError("magnetic.bracket must be [lo, hi] with lo < hi");
        std::function<MagneticField2D(double)> family;
        if (m.field == "critical_family")
            family = [](double s) { return MagneticField2D::critical_family(s); };
        else if (m.field == "boundary_power")
            family = [](double s) { return MagneticField2D::boundary_power(s); };
        else if (m.field == "constant")
            family = [](double s) { return MagneticField2D::constant(s); };
        else
            throw ConfigError("bisection needs a one-parameter field family, got '" + m.field + "'");
        TransitionBracket b = critical_strength_bisection(family, m.fiber, m.bracket[0], m.bracket[1],
                                                          5e-3, pw.classify.solver);
        result["bisection"] = to_json(b);
        result["bisection"]["fiber"] = m.fiber;
        os << "  transition on fiber j = " << m.fiber << ": " << fmt(b.estimate()) << " in [" << fmt(b.lo)
           << ", " << fmt(b.hi) << "]\n";
    }
    CommandOutput out;
    out.exit_code = exit_code(t.aggregate);
    out.report = command_report(c, std::move(result));
    out.text = os.str();
    return out;
}

// Evolve -----------------------------------------------------------------------

CommandOutput run_evolve(const RunConfig& c) {
    const EvolveConfig& e = c.evolve;
    RadialDiracProblem p = radial_problem_from(c.problem);
    FiberGridOptions grid;
    grid.n = e.n;
    grid.delta_cut = e.delta_cut;
    grid.wall_phase = e.wall_phase;
    if (e.boundary == "reflecting")
        grid.boundary = BoundaryVariant::Reflecting;
    else if (e.boundary == "phase_shifted")
        grid.boundary = BoundaryVariant::PhaseShifted;
    else
        throw ConfigError("evolve.boundary must be 'reflecting' or 'phase_shifted', got '" + e.boundary + "'");

    CommandOutput out;
    std::ostringstream os, csv;
    if (e.probe) {
        ProbeOptions po;
        po.grid = grid;
        po.t_end = e.t_end;
        po.dt = e.dt;
        po.centre = e.centre;
        po.width = e.width;
        po.sample_interval = e.sample_interval;
        ExtensionProbe probe = extension_dependence_probe(p, po);
        csv << "t,difference\n" << std::setprecision(12);
        for (std::size_t i = 0; i < probe.times.size(); ++i)
            csv << probe.times[i] << ',' << probe.difference[i] << '\n';
        out.report = command_report(c, to_json(probe));
        os << "extension dependence " << fmt(probe.divergence) << " up to t = " << fmt(e.t_end)
           << ", max cut amplitude " << fmt(probe.max_cut_amplitude) << '\n';
    } else {
        DiscretizedFiber f = DiscretizedFiber::build(p, grid);
        EvolutionOptions eo{e.sample_interval, e.band};
        EvolutionRun run = crank_nicolson_evolve(f, f.gaussian_packet(e.centre, e.width), e.t_end, e.dt, eo);
        const EvolutionDiagnostics& d = run.diagnostics;
        write_csv(csv, d);
        json result = to_json(d);
        double max_band = d.band_prob.empty() ? 0.0 : *std::max_element(d.band_prob.begin(), d.band_prob.end());
        double max_cut = d.cut_amp.empty() ? 0.0 : *std::max_element(d.cut_amp.begin(), d.cut_amp.end());
        result["max_band_prob"] = json_number(max_band);
        result["max_cut_amp"] = json_number(max_cut);
        result["hermiticity_defect"] = json_number(f.hermiticity_defect());
        out.report = command_report(c, std::move(result));
        // the command fails only if the scheme stopped being unitary
        out.exit_code = d.total_drift <= 1e-8 ? kExitPass : kExitFail;
        os << d.steps << " steps to t = " << fmt(e.t_end) << " on " << f.size() << " unknowns\n"
           << "  norm drift " << fmt(d.total_drift) << ", max band probability " << fmt(max_band)
           << ", max cut amplitude " << fmt(max_cut) << '\n';
    }
    out.csv = csv.str();
    out.text = os.str();
    return out;
}

// Identity check ---------------------------------------------------------------

CommandOutput run_identity_check(const RunConfig& c) {
    const IdentityConfig& k = c.identity;
    if (k.steps.size() < 2) throw ConfigError("identity.steps needs at least two step sizes");
    for (std::size_t i = 0; i + 1 < k.steps.size(); ++i)
        if (!(k.steps[i] > k.steps[i + 1] && k.steps[i + 1] > 0.0))
            throw ConfigError("identity.steps must be positive and decreasing");

    std::vector<double> residual;
    std::vector<bool> holds;
    json rows = json::array();
    double scale = 1.0;

    if (k.check == "weighted") {
        auto p1 = DiracCoefficients::pauli_1d();
        auto p2 = DiracCoefficients::pauli_2d();
        DiracCoefficients op = p2;
        if (k.potential == "zero") {
        } else if (k.potential == "sigma3_const") {
            op = p2.with_potential({{p2.scalar_structure(), constant_field(1.3, 2)}});
        } else if (k.potential == "sigma3_x1") {
            op = p2.with_potential({{p2.scalar_structure(), linear_field(0, 1.0, 0.0, 2)}});
        } else if (k.potential == "sigma3_mixed") {
            ScalarField q("sin(2 x1) x2 + 1", [](const Point& x) { return std::sin(2 * x[0]) * x[1] + 1; },
                          [](const Point& x) {
                              Point g(2);
                              g << 2 * std::cos(2 * x[0]) * x[1], std::sin(2 * x[0]);
                              return g;
                          });
            op = p2.with_potential({{p2.scalar_structure(), q}});
        } else if (k.potential == "pauli1d_linear") {
            op = p1.with_potential({{p1.scalar_structure(), linear_field(0, 2.0, 0.5, 1)}});
        } else {
            throw ConfigError("unknown identity potential '" + k.potential + "'");
        }
        int d = op.dimension();
        ScalarField h;
        if (k.weight == "zero") {
            h = constant_field(0.0, d);
        } else if (k.weight == "mixed") {
            if (d == 2)
                h = ScalarField("x1 + x2^2 / 2", [](const Point& x) { return x[0] + 0.5 * x[1] * x[1]; },
                                [](const Point& x) {
                                    Point g(2);
                                    g << 1.0, x[1];
                                    return g;
                                });
            else
                h = ScalarField("x + x^2 / 2", [](const Point& x) { return x[0] + 0.5 * x[0] * x[0]; },
                                [](const Point& x) {
                                    Point g(1);
                                    g << 1.0 + x[0];
                                    return g;
                                });
        } else {
            throw ConfigError("identity.weight must be 'zero' or 'mixed', got '" + k.weight + "'");
        }
        for (double step : k.steps) {
            IdentityResidual r = weighted_identity_residual(op, h, k.zeta, step);
            for (double x : r.lhs) scale = std::max(scale, std::abs(x));
            residual.push_back(r.residual);
            rows.push_back(to_json(r));
        }
    } else if (k.check == "susy" || k.check == "diamagnetic") {
        TransversalGauge g = transversal_gauge(field_from(c.magnetic));
        for (double step : k.steps) {
            if (k.check == "susy") {
                SusyResidual r = susy_factorization_residual(g, step);
                residual.push_back(std::max(r.plus, r.minus));
                rows.push_back(to_json(r));
            } else {
                DiamagneticCheck r = diamagnetic_check(g, step);
                holds.push_back(r.holds);
                json row = to_json(r);
                row["h"] = json_number(step);
                rows.push_back(row);
            }
        }
    } else {
        throw ConfigError("identity.check must be 'weighted', 'susy' or 'diamagnetic', got '" + k.check + "'");
    }

    CommandOutput out;
    std::ostringstream os;
    json result = {{"check", k.check}, {"steps", k.steps}, {"rows", rows}};
    bool pass = true;
    if (k.check == "diamagnetic") {
        pass = std::all_of(holds.begin(), holds.end(), [](bool b) { return b; });
        os << "diamagnetic inequality " << (pass ? "holds" : "fails") << " at every step\n";
        for (std::size_t i = 0; i < holds.size(); ++i)
            os << "  h = " << fmt(k.steps[i]) << ": " << (holds[i] ? "holds" : "fails") << '\n';
    } else {
        double worst = *std::max_element(residual.begin(), residual.end());
        bool exact = worst <= 1e-11 * scale;
        std::vector<double> ord = exact ? std::vector<double>{} : orders(k.steps, residual);
        double min_order = ord.empty() ? std::numeric_limits<double>::infinity()
                                       : *std::min_element(ord.begin(), ord.end());
        pass = exact || min_order >= k.min_order;
        json ord_json = json::array();
        for (double o : ord) ord_json.push_back(json_number(o));
        result["residuals"] = residual;
        result["orders"] = ord_json;
        result["exact"] = exact;
        result["measured_order"] = json_number(min_order);
        result["required_order"] = k.min_order;
        os << k.check << " identity";
        if (k.check == "weighted") os << " (" << k.potential << ", weight " << k.weight << ")";
        os << ": " << (pass ? "pass" : "fail");
        if (exact)
            os << ", exact to roundoff";
        else
            os << ", order " << std::fixed << std::setprecision(3) << min_order << std::defaultfloat
               << " (required " << fmt(k.min_order) << ")";
        os << "\n  step        residual      order\n";
        for (std::size_t i = 0; i < residual.size(); ++i) {
            os << "  " << std::left << std::setw(12) << fmt(k.steps[i]) << std::setw(14) << std::setprecision(4)
               << std::scientific << residual[i];
            if (i > 0 && !ord.empty()) os << std::fixed << std::setprecision(3) << ord[i - 1];
            os << std::defaultfloat << '\n';
        }
    }
    result["pass"] = pass;
    out.exit_code = pass ? kExitPass : kExitFail;
    out.report = command_report(c, std::move(result));
    out.text = os.str();
    return out;
}

CommandOutput run_command(const RunConfig& c) {
    if (c.command == "classify") return run_classify(c);
    if (c.command == "sweep") return run_sweep_command(c);
    if (c.command == "certify") return run_certify(c);
    if (c.command == "fibers") return run_fibers(c);
    if (c.command == "evolve") return run_evolve(c);
    if (c.command == "identity-check") return run_identity_check(c);
    throw ConfigError("unknown command '" + c.command + "'");
}

}  // namespace confine
