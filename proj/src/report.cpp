#include "confine/report.hpp"

#include <cmath>

namespace confine {

using nlohmann::json;

json json_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json json_point(const Point& p) {
    json a = json::array();
    for (int i = 0; i < p.size(); ++i) a.push_back(json_number(p[i]));
    return a;
}

namespace {

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

const char* remainder_name(Remainder r) {
    switch (r) {
        case Remainder::Zero: return "zero";
        case Remainder::Bounded: return "bounded";
        case Remainder::Integrable: return "integrable";
        case Remainder::Unknown: return "unknown";
    }
    return "?";
}

}  // namespace

json to_json(const IntegralTest& t) {
    return {{"kind", to_string(t.kind)},
            {"value", json_number(t.value)},
            {"partial", numbers(t.partial)},
            {"refinements", t.refinements},
            {"tail_slope", json_number(t.tail_slope)},
            {"note", t.note}};
}

json to_json(const TailClass& t) {
    return {{"verdict", to_string(t.verdict)},
            {"exponent", json_number(t.exponent)},
            {"ci_low", json_number(t.ci_low)},
            {"ci_high", json_number(t.ci_high)},
            {"samples", t.samples},
            {"decades", json_number(t.decades)},
            {"drift", json_number(t.drift)},
            {"effective_margin", json_number(t.effective_margin)},
            {"near_critical", t.near_critical},
            {"note", t.note}};
}

json to_json(const L2Count& c) {
    return {{"count", c.count},
            {"inconclusive", c.inconclusive},
            {"tails", {to_json(c.tails[0]), to_json(c.tails[1])}},
            {"trajectory_samples", {c.trajectories[0].size(), c.trajectories[1].size()}},
            {"zeta", {json_number(c.zeta.real()), json_number(c.zeta.imag())}},
            {"max_orthogonality_defect", json_number(c.max_orthogonality_defect)}};
}

json to_json(const EndpointAsymptotics& e) {
    return {{"inverse_distance", json_number(e.inverse_distance)},
            {"strong_order", json_number(e.strong_order)},
            {"strong_coefficient", json_number(e.strong_coefficient)},
            {"remainder", remainder_name(e.remainder)}};
}

json to_json(const EndpointClassification& c) {
    json j = {{"endpoint", to_string(c.endpoint)},
              {"class", to_string(c.cls)},
              {"method", to_string(c.method)},
              {"rule", to_string(c.rule)},
              {"margin", json_number(c.margin)},
              {"near_threshold", c.near_threshold},
              {"note", c.note}};
    if (c.asymptotics) j["asymptotics"] = to_json(*c.asymptotics);
    if (c.integral) j["integral"] = to_json(*c.integral);
    if (c.count) j["count"] = to_json(*c.count);
    return j;
}

json to_json(const EsaVerdict& v) {
    json j = {{"verdict", short_name(v.verdict)}, {"rule", to_string(v.rule)}, {"note", v.note}};
    if (v.left) j["left"] = to_json(*v.left);
    if (v.right) j["right"] = to_json(*v.right);
    return j;
}

json to_json(const ChernoffVerdict& v) {
    json tails = json::array();
    for (const auto& sign : v.tails) tails.push_back({to_json(sign[0]), to_json(sign[1])});
    return {{"verdict", to_json(v.verdict)},
            {"tails", tails},
            {"square_integrable", {v.square_integrable[0], v.square_integrable[1]}}};
}

json to_json(const FiberVerdictTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"j", r.j}, {"m", json_number(r.m)}, {"verdict", to_json(r.verdict)}});
    json j = {{"rows", rows},
              {"j_range", t.j_range},
              {"aggregate", short_name(t.aggregate)},
              {"rule", to_string(t.rule)},
              {"boundary_classes_uniform", t.boundary_classes_uniform},
              {"note", t.note}};
    j["failing_fiber"] = t.failing_fiber ? json(*t.failing_fiber) : json(nullptr);
    return j;
}

json to_json(const BoundaryFieldCertificate& c) {
    json j = {{"holds", c.holds}, {"worst_ratio", json_number(c.worst_ratio)}, {"reason", c.reason}};
    j["failure_r"] = c.failure_r ? json_number(*c.failure_r) : json(nullptr);
    return j;
}

json to_json(const TransitionBracket& b) {
    return {{"lo", json_number(b.lo)},
            {"hi", json_number(b.hi)},
            {"estimate", json_number(b.estimate())},
            {"iterations", b.iterations}};
}

json to_json(const SusyResidual& r) {
    return {{"h", json_number(r.h)},
            {"plus", json_number(r.plus)},
            {"minus", json_number(r.minus)},
            {"plus_by_function", numbers(r.plus_by_function)},
            {"minus_by_function", numbers(r.minus_by_function)}};
}

json to_json(const DiamagneticCheck& d) {
    return {{"holds", d.holds},
            {"field_term", numbers(d.field_term)},
            {"kinetic_term", numbers(d.kinetic_term)}};
}

json to_json(const CertificateReport& r) {
    json j = {{"outcome", to_string(r.outcome)},
              {"rule", to_string(r.rule)},
              {"constant", json_number(r.constant)},
              {"min_eigenvalue", json_number(r.min_eigenvalue)},
              {"witness_delta", json_number(r.witness_delta)},
              {"shell_min", numbers(r.shell_min)},
              {"grid", r.grid},
              {"note", r.note}};
    j["witness"] = r.witness ? json_point(*r.witness) : json(nullptr);
    return j;
}

json to_json(const DistanceThresholdCertificate& c) {
    return {{"outcome", to_string(c.outcome)},
            {"rule", to_string(Rule::DistancePotentialFlat)},
            {"lambda", json_number(c.lambda)},
            {"shift", json_number(c.shift)},
            {"scalar_part", to_json(c.scalar_part)},
            {"perturbation", to_json(c.perturbation)},
            {"note", c.note}};
}

json to_json(const ClassMembership& m) {
    json j = {{"member", m.member},
              {"inconclusive", m.inconclusive},
              {"c_lower", json_number(m.c_lower)},
              {"c_upper", json_number(m.c_upper)},
              {"c_gradient", json_number(m.c_gradient)},
              {"failures", m.failures}};
    j["epsilon"] = m.epsilon ? json_number(*m.epsilon) : json(nullptr);
    return j;
}

json to_json(const MuEstimate& m) {
    return {{"mu", json_number(m.mu)}, {"by_shell", numbers(m.by_shell)}, {"increasing", m.increasing}};
}

json to_json(const IdentityResidual& r) {
    return {{"step", json_number(r.step)},
            {"residual", json_number(r.residual)},
            {"lhs", numbers(r.lhs)},
            {"rhs", numbers(r.rhs)}};
}

json to_json(const EvolutionDiagnostics& d) {
    return {{"times", numbers(d.times)},
            {"norm", numbers(d.norm)},
            {"band_prob", numbers(d.band_prob)},
            {"flux", numbers(d.flux)},
            {"cut_amp", numbers(d.cut_amp)},
            {"max_step_drift", json_number(d.max_step_drift)},
            {"total_drift", json_number(d.total_drift)},
            {"steps", d.steps}};
}

json to_json(const ExtensionProbe& p) {
    return {{"divergence", json_number(p.divergence)},
            {"times", numbers(p.times)},
            {"difference", numbers(p.difference)},
            {"max_cut_amplitude", json_number(p.max_cut_amplitude)}};
}

}  // namespace confine
