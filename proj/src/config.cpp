#include "confine/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace confine {

namespace {

using nlohmann::json;

const std::set<std::string> kSweepParameters = {"lambda_e", "lambda_m", "lambda_s", "lambda0",
                                                "lambda1",  "lambda3",  "alpha"};

template <class V> void visit(CoefficientConfig& c, V& v) {
    v("family", c.family);
    v("params", c.params);
    v("side", c.side);
    v("grid", c.grid);
    v("values", c.values);
}

template <class V> void visit(ProblemConfig& c, V& v) {
    v("domain", c.domain);
    v("a", c.a);
    v("b", c.b);
    v("dimension", c.dimension);
    v("inner_radius", c.inner_radius);
    v("angular", c.angular);
    v("spectral_shift", c.spectral_shift);
}

template <class V> void visit(MagneticConfig& c, V& v) {
    v("field", c.field);
    v("strength", c.strength);
    v("r", c.r);
    v("b", c.b);
    v("j_range", c.j_range);
    v("numerical_at_boundary", c.numerical_at_boundary);
    v("lambda_s", c.lambda_s);
    v("lambda_e", c.lambda_e);
    v("fiber", c.fiber);
    v("bracket", c.bracket);
}

template <class V> void visit(NumericsConfig& c, V& v) {
    v("rtol", c.rtol);
    v("atol", c.atol);
    v("delta_min", c.delta_min);
    v("max_log_step", c.max_log_step);
    v("fit_decades", c.fit_decades);
    v("margin", c.margin);
    v("min_margin", c.min_margin);
    v("force", c.force);
    v("grid_delta_min", c.grid_delta_min);
    v("grid_delta0", c.grid_delta0);
    v("shells", c.shells);
    v("angular_samples", c.angular_samples);
    v("jobs", c.jobs);
}

template <class V> void visit(CertifyConfig& c, V& v) {
    v("kind", c.kind);
    v("operator", c.op);
    v("lambda", c.lambda);
    v("alpha", c.alpha);
    v("structure", c.structure);
    v("h0", c.h0);
    v("c", c.c);
    v("w_lambda", c.w_lambda);
    v("w_structure", c.w_structure);
    v("mu", c.mu);
    v("convex_flat", c.convex_flat);
}

template <class V> void visit(EvolveConfig& c, V& v) {
    v("t_end", c.t_end);
    v("dt", c.dt);
    v("n", c.n);
    v("delta_cut", c.delta_cut);
    v("boundary", c.boundary);
    v("wall_phase", c.wall_phase);
    v("width", c.width);
    v("centre", c.centre);
    v("sample_interval", c.sample_interval);
    v("band", c.band);
    v("probe", c.probe);
}

template <class V> void visit(IdentityConfig& c, V& v) {
    v("check", c.check);
    v("potential", c.potential);
    v("weight", c.weight);
    v("zeta", c.zeta);
    v("steps", c.steps);
    v("min_order", c.min_order);
}

template <class V> void visit(OutputConfig& c, V& v) {
    v("path", c.path);
    v("json", c.json);
}

// Reading ---------------------------------------------------------------------

class Reader {
public:
    Reader(const json& table, const TomlDocument& doc, std::string path)
        : t_(table), doc_(doc), path_(std::move(path)) {
        if (!t_.is_object()) fail(path_, "[" + path_ + "] must be a table");
    }

    void operator()(const char* key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) fail(at(key), "'" + at(key) + "' must be a string");
            out = v->get<std::string>();
        }
    }
    void operator()(const char* key, double& out) {
        if (const json* v = take(key)) out = number(*v, at(key));
    }
    void operator()(const char* key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) fail(at(key), "'" + at(key) + "' must be an integer");
            out = v->get<int>();
        }
    }
    void operator()(const char* key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) fail(at(key), "'" + at(key) + "' must be true or false");
            out = v->get<bool>();
        }
    }
    void operator()(const char* key, std::optional<double>& out) {
        if (const json* v = take(key)) out = number(*v, at(key));
    }
    void operator()(const char* key, std::vector<double>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) fail(at(key), "'" + at(key) + "' must be an array of numbers");
            out.clear();
            for (const auto& x : *v) out.push_back(number(x, at(key)));
        }
    }
    template <class T> void table(const char* key, T& out) {
        if (const json* v = take(key)) {
            Reader sub(*v, doc_, at(key));
            visit(out, sub);
            sub.finish();
        }
    }

    void finish() const {
        for (auto it = t_.begin(); it != t_.end(); ++it)
            if (!seen_.count(it.key()))
                fail(at(it.key()), "unknown key '" + at(it.key()) + "'");
    }

    const json* take(const std::string& key) {
        seen_.insert(key);
        auto it = t_.find(key);
        return it == t_.end() ? nullptr : &*it;
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        throw ConfigError(msg, doc_.line_of(path));
    }

    double number(const json& v, const std::string& path) const {
        if (!v.is_number()) fail(path, "'" + path + "' must be a number");
        return v.get<double>();
    }

private:
    const json& t_;
    const TomlDocument& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_sweep(const json& t, const TomlDocument& doc, SweepConfig& s) {
    Reader r(t, doc, "sweep");
    r("model", s.model);
    r("method", s.method);
    std::vector<std::string> names;
    if (const json* axes = r.take("axes")) {
        if (!axes->is_array()) r.fail("sweep.axes", "'sweep.axes' must be an array of names");
        for (const auto& a : *axes) {
            if (!a.is_string()) r.fail("sweep.axes", "'sweep.axes' must be an array of names");
            names.push_back(a.get<std::string>());
        }
    }
    if (names.size() > 2) r.fail("sweep.axes", "at most two sweep axes are supported");
    s.axes.clear();
    s.fixed.clear();
    std::set<std::string> axis_set(names.begin(), names.end());
    if (axis_set.size() != names.size()) r.fail("sweep.axes", "sweep axes must be distinct");
    for (const auto& n : names) {
        if (!kSweepParameters.count(n)) r.fail("sweep.axes", "unknown sweep parameter '" + n + "'");
        const json* range = r.take(n);
        std::string path = "sweep." + n;
        if (!range || !range->is_array() || range->size() != 3)
            r.fail(range ? path : "sweep.axes", "axis '" + n + "' needs [start, stop, step]");
        SweepAxis ax{n, r.number((*range)[0], path), r.number((*range)[1], path),
                     r.number((*range)[2], path)};
        if (!(ax.step > 0.0) || ax.stop < ax.start)
            r.fail(path, "axis '" + n + "' needs step > 0 and stop >= start");
        s.axes.push_back(ax);
    }
    for (const auto& p : kSweepParameters) {
        if (axis_set.count(p)) continue;
        if (const json* v = r.take(p)) {
            if (v->is_array()) r.fail("sweep." + p, "'" + p + "' has a range but is not listed in sweep.axes");
            s.fixed[p] = r.number(*v, "sweep." + p);
        }
    }
    r.finish();
}

RunConfig from_tree(const TomlDocument& doc) {
    RunConfig c;
    Reader top(doc.root, doc, "");
    top("command", c.command);
    if (const json* p = top.take("problem")) {
        Reader r(*p, doc, "problem");
        visit(c.problem, r);
        r.table("v0", c.problem.v0);
        r.table("v1", c.problem.v1);
        r.table("v2", c.problem.v2);
        r.table("v3", c.problem.v3);
        r.finish();
    }
    top.table("magnetic", c.magnetic);
    top.table("numerics", c.numerics);
    if (const json* s = top.take("sweep")) read_sweep(*s, doc, c.sweep);
    top.table("certify", c.certify);
    top.table("evolve", c.evolve);
    top.table("identity", c.identity);
    top.table("output", c.output);
    top.finish();
    return c;
}

// Writing ---------------------------------------------------------------------

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

class TomlWriter {
public:
    explicit TomlWriter(std::ostringstream& os) : os_(os) {}

    void operator()(const char* key, std::string& v) { os_ << key << " = " << quote(v) << '\n'; }
    void operator()(const char* key, double& v) { os_ << key << " = " << format_double(v) << '\n'; }
    void operator()(const char* key, int& v) { os_ << key << " = " << v << '\n'; }
    void operator()(const char* key, bool& v) { os_ << key << " = " << (v ? "true" : "false") << '\n'; }
    void operator()(const char* key, std::optional<double>& v) {
        if (v) os_ << key << " = " << format_double(*v) << '\n';
    }
    void operator()(const char* key, std::vector<double>& v) {
        os_ << key << " = [";
        for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? ", " : "") << format_double(v[i]);
        os_ << "]\n";
    }

private:
    std::ostringstream& os_;
};

class JsonWriter {
public:
    explicit JsonWriter(json& j) : j_(j) {}
    template <class T> void operator()(const char* key, T& v) { j_[key] = v; }
    void operator()(const char* key, std::optional<double>& v) {
        if (v) j_[key] = *v;
    }

private:
    json& j_;
};

template <class T> json section_json(const T& c) {
    json j = json::object();
    JsonWriter w(j);
    visit(const_cast<T&>(c), w);
    return j;
}

template <class T> void section_toml(std::ostringstream& os, const char* name, const T& c) {
    os << "\n[" << name << "]\n";
    TomlWriter w(os);
    visit(const_cast<T&>(c), w);
}

}  // namespace

std::vector<double> SweepAxis::values() const {
    std::vector<double> out;
    long n = std::lround(std::floor((stop - start) / step + 1e-9));
    // snap to 12 significant digits so 0.3 + 5 * 0.01 prints as 0.35
    for (long k = 0; k <= n; ++k) {
        double x = start + k * step;
        double scale = std::pow(10.0, 11 - std::floor(std::log10(std::max(std::abs(x), 1e-300))));
        out.push_back(x == 0.0 ? 0.0 : std::round(x * scale) / scale);
    }
    return out;
}

RunConfig RunConfig::from_toml(const std::string& text) { return from_tree(parse_toml(text)); }

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return from_toml(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
    // Round-trip through the document so the same validation applies.
    TomlDocument doc = parse_toml(to_toml());
    json v = parse_toml_value(value);
    json* node = &doc.root;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = dotted_key.find('.', start);
        std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("malformed key '" + dotted_key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = v;
            break;
        }
        if (!node->contains(part)) (*node)[part] = json::object();
        node = &(*node)[part];
        if (!node->is_object()) throw ConfigError("'" + dotted_key + "' does not name a table key");
        start = dot + 1;
    }
    // a new axis range is given as an array; list it when the key is a sweep parameter
    if (dotted_key.rfind("sweep.", 0) == 0 && v.is_array()) {
        std::string name = dotted_key.substr(6);
        auto& axes = doc.root["sweep"]["axes"];
        if (!axes.is_array()) axes = json::array();
        if (std::find(axes.begin(), axes.end(), name) == axes.end()) axes.push_back(name);
    }
    try {
        *this = from_tree(doc);
    } catch (const ConfigError& e) {
        // line numbers would point into the regenerated document, not the user's file
        throw ConfigError(std::string("--set ") + dotted_key + ": " + e.message());
    }
}

std::string RunConfig::to_toml() const {
    std::ostringstream os;
    os << "command = " << quote(command) << '\n';
    section_toml(os, "problem", problem);
    section_toml(os, "problem.v0", problem.v0);
    section_toml(os, "problem.v1", problem.v1);
    section_toml(os, "problem.v2", problem.v2);
    section_toml(os, "problem.v3", problem.v3);
    section_toml(os, "magnetic", magnetic);
    section_toml(os, "numerics", numerics);
    os << "\n[sweep]\nmodel = " << quote(sweep.model) << "\nmethod = " << quote(sweep.method)
       << "\naxes = [";
    for (std::size_t i = 0; i < sweep.axes.size(); ++i)
        os << (i ? ", " : "") << quote(sweep.axes[i].name);
    os << "]\n";
    for (const auto& a : sweep.axes)
        os << a.name << " = [" << format_double(a.start) << ", " << format_double(a.stop) << ", "
           << format_double(a.step) << "]\n";
    for (const auto& [k, v] : sweep.fixed) os << k << " = " << format_double(v) << '\n';
    section_toml(os, "certify", certify);
    section_toml(os, "evolve", evolve);
    section_toml(os, "identity", identity);
    section_toml(os, "output", output);
    return os.str();
}

nlohmann::json RunConfig::to_json() const {
    json j;
    j["command"] = command;
    j["problem"] = section_json(problem);
    j["problem"]["v0"] = section_json(problem.v0);
    j["problem"]["v1"] = section_json(problem.v1);
    j["problem"]["v2"] = section_json(problem.v2);
    j["problem"]["v3"] = section_json(problem.v3);
    j["magnetic"] = section_json(magnetic);
    j["numerics"] = section_json(numerics);
    json s;
    s["model"] = sweep.model;
    s["method"] = sweep.method;
    s["axes"] = json::array();
    for (const auto& a : sweep.axes) {
        s["axes"].push_back(a.name);
        s[a.name] = {a.start, a.stop, a.step};
    }
    for (const auto& [k, v] : sweep.fixed) s[k] = v;
    j["sweep"] = s;
    j["certify"] = section_json(certify);
    j["evolve"] = section_json(evolve);
    j["identity"] = section_json(identity);
    j["output"] = section_json(output);
    return j;
}

}  // namespace confine
