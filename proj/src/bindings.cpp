#include "confine/commands.hpp"
#include "confine/magnetic.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

namespace py = pybind11;
using namespace confine;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

RunConfig make_config(const std::string& toml, const std::map<std::string, std::string>& overrides) {
    RunConfig c = RunConfig::from_toml(toml);
    for (const auto& [key, value] : overrides) c.set(key, value);
    return c;
}

py::dict run(const std::string& toml, const std::map<std::string, std::string>& overrides) {
    RunConfig c = make_config(toml, overrides);
    CommandOutput out;
    {
        py::gil_scoped_release release;
        out = run_command(c);
    }
    py::dict d;
    d["exit_code"] = out.exit_code;
    d["report"] = to_python(out.report);
    d["text"] = out.text;
    d["csv"] = out.csv;
    return d;
}

py::dict classify_power(double lambda0, double lambda1, double lambda3, bool numerical) {
    RadialDiracProblem p;
    p.potential.domain = Interval{0.0, 1.0};
    auto power = [](double l) { return Coefficient::closed_form(Family::Power, {l, l, 1.0}); };
    if (lambda0 != 0.0) p.potential.v0 = power(lambda0);
    if (lambda1 != 0.0) p.potential.v1 = power(lambda1);
    if (lambda3 != 0.0) p.potential.v3 = power(lambda3);
    ClassifyOptions opt;
    if (numerical) opt.force = ForceMethod::Numerical;
    EsaVerdict v;
    {
        py::gil_scoped_release release;
        v = esa_verdict_1d(p, opt);
    }
    py::dict d;
    d["verdict"] = to_string(v.verdict);
    d["rule"] = to_string(v.rule);
    d["left"] = v.left ? py::cast(to_string(v.left->cls)) : py::none();
    d["right"] = v.right ? py::cast(to_string(v.right->cls)) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(confine, m) {
    m.doc() = "Essential self-adjointness and limit point / limit circle classification of Dirac operators";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<RejectedInput>(m, "RejectedInput", PyExc_ValueError);

    m.def("run", &run, py::arg("config") = "", py::arg("overrides") = std::map<std::string, std::string>{},
          "Run the command named in a TOML config; overrides map dotted keys to TOML values.");
    m.def("default_config", [](const std::string& command) {
        RunConfig c;
        c.command = command;
        return c.to_toml();
    }, py::arg("command") = "classify");

    m.def("classify_power", &classify_power, py::arg("lambda0") = 0.0, py::arg("lambda1") = 0.0,
          py::arg("lambda3") = 0.0, py::arg("numerical") = false,
          "Classify the power family lambda/x + lambda/(1 - x) on (0, 1), one lambda per coefficient.");
    m.def("power_family_verdict", &power_family_verdict, py::arg("lambda0"), py::arg("lambda1"), py::arg("lambda3"));
    m.def("em_threshold_verdict", &em_threshold_verdict, py::arg("lambda_m"), py::arg("lambda_s"),
          py::arg("lambda_e"));
    m.def("chernoff_verdict", [](double alpha) { return to_string(chernoff_example_verdict(alpha).verdict.verdict); },
          py::arg("alpha"));

    m.def("pauli_decompose", [](const Eigen::Matrix2cd& h) {
        PauliCoefficients c = pauli_decompose(HermitianMatrix::from(h));
        return py::make_tuple(c.v0, c.v1, c.v2, c.v3);
    }, py::arg("matrix"));

    m.def("critical_family_fibers", [](double alpha, int j_range) {
        PartialWaveOptions opt;
        opt.j_range = j_range;
        FiberVerdictTable t;
        {
            py::gil_scoped_release release;
            t = partial_wave_verdict(MagneticField2D::critical_family(alpha), opt);
        }
        py::dict d;
        d["verdict"] = to_string(t.aggregate);
        d["rule"] = to_string(t.rule);
        d["failing_fiber"] = t.failing_fiber ? py::cast(*t.failing_fiber) : py::none();
        d["certificate"] = boundary_field_certificate(MagneticField2D::critical_family(alpha), 0.1).holds;
        return d;
    }, py::arg("alpha"), py::arg("j_range") = 16);
}
