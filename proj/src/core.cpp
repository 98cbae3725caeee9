#include "confine/core.hpp"

#include "confine/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace confine {

namespace {

const cplx I(0.0, 1.0);

CMat sigma_raw(int j) {
    CMat s(2, 2);
    switch (j) {
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, -I, I, 0; break;
        case 3: s << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("Pauli index must be 1, 2 or 3");
    }
    return s;
}

}  // namespace

HermitianMatrix HermitianMatrix::from(const CMat& m) {
    if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4))
        throw std::invalid_argument("Hermitian matrices here are 2x2 or 4x4");
    double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 0.0) {
        std::ostringstream os;
        os << "matrix is not Hermitian: max |H - H^*| = " << dev;
        throw SymmetryViolation(os.str(), dev);
    }
    return HermitianMatrix(m);
}

HermitianMatrix HermitianMatrix::identity(int k) {
    if (k != 2 && k != 4) throw std::invalid_argument("identity dimension must be 2 or 4");
    return HermitianMatrix(CMat::Identity(k, k));
}

HermitianMatrix HermitianMatrix::zero(int k) {
    if (k != 2 && k != 4) throw std::invalid_argument("zero dimension must be 2 or 4");
    return HermitianMatrix(CMat::Zero(k, k));
}

HermitianMatrix HermitianMatrix::sigma(int j) { return HermitianMatrix(sigma_raw(j)); }

HermitianMatrix HermitianMatrix::alpha(int j) {
    CMat a = CMat::Zero(4, 4);
    a.block(0, 2, 2, 2) = sigma_raw(j);
    a.block(2, 0, 2, 2) = sigma_raw(j);
    return HermitianMatrix(a);
}

HermitianMatrix HermitianMatrix::beta() {
    CMat b = CMat::Zero(4, 4);
    b(0, 0) = b(1, 1) = 1.0;
    b(2, 2) = b(3, 3) = -1.0;
    return HermitianMatrix(b);
}

Eigen::VectorXd HermitianMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMat> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

PauliCoefficients pauli_decompose(const HermitianMatrix& h) {
    if (h.dimension() != 2) throw std::invalid_argument("Pauli decomposition needs a 2x2 matrix");
    const CMat& m = h.matrix();
    PauliCoefficients c;
    c.v0 = 0.5 * m.trace().real();
    c.v1 = 0.5 * (sigma_raw(1) * m).trace().real();
    c.v2 = 0.5 * (sigma_raw(2) * m).trace().real();
    c.v3 = 0.5 * (sigma_raw(3) * m).trace().real();
    return c;
}

CMat pauli_recompose(const PauliCoefficients& c) {
    return c.v0 * CMat::Identity(2, 2) + c.v1 * sigma_raw(1) + c.v2 * sigma_raw(2) +
           c.v3 * sigma_raw(3);
}

const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }

// Interval ---------------------------------------------------------------------

bool Interval::infinite_right() const { return std::isinf(b); }

double Interval::length() const { return b - a; }

double Interval::distance(double x) const { return std::min(x - a, b - x); }

double Interval::distance_to(Side s, double x) const { return s == Side::Left ? x - a : b - x; }

EndpointAsymptotics operator+(const EndpointAsymptotics& x, const EndpointAsymptotics& y) {
    EndpointAsymptotics r;
    r.inverse_distance = x.inverse_distance + y.inverse_distance;
    r.remainder = std::max(x.remainder, y.remainder);
    bool sx = x.has_strong_term(), sy = y.has_strong_term();
    if (sx && sy) {
        if (x.strong_order == y.strong_order) {
            r.strong_order = x.strong_order;
            r.strong_coefficient = x.strong_coefficient + y.strong_coefficient;
        } else {
            const auto& big = x.strong_order > y.strong_order ? x : y;
            r.strong_order = big.strong_order;
            r.strong_coefficient = big.strong_coefficient;
            r.remainder = Remainder::Unknown;
        }
    } else if (sx) {
        r.strong_order = x.strong_order;
        r.strong_coefficient = x.strong_coefficient;
    } else if (sy) {
        r.strong_order = y.strong_order;
        r.strong_coefficient = y.strong_coefficient;
    }
    return r;
}

const char* to_string(Family f) {
    switch (f) {
        case Family::Power: return "power";
        case Family::Logarithmic: return "log";
        case Family::Chernoff: return "chernoff";
        case Family::Sine: return "sine";
    }
    return "?";
}

// Coefficient ------------------------------------------------------------------

struct Coefficient::Spline {
    std::vector<double> x, y, m;  // m: second derivatives

    Spline(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
        size_t n = x.size();
        m.assign(n, 0.0);
        if (n < 3) return;
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (size_t i = 1; i + 1 < n; ++i) {
            double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
            double a = h0 / 6, b = (h0 + h1) / 3, cc = h1 / 6;
            double r = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            double denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (r - a * d[i - 1]) / denom;
        }
        for (size_t i = n - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];
    }

    double operator()(double t) const {
        if (t <= x.front()) return y.front();
        if (t >= x.back()) return y.back();
        size_t k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
        size_t i = k - 1;
        double h = x[k] - x[i];
        double A = (x[k] - t) / h, B = (t - x[i]) / h;
        return A * y[i] + B * y[k] + ((A * A * A - A) * m[i] + (B * B * B - B) * m[k]) * h * h / 6;
    }
};

Coefficient Coefficient::zero() { return Coefficient(); }

Coefficient Coefficient::constant(double c) {
    if (c == 0.0) return zero();
    Coefficient k;
    k.kind_ = Kind::Constant;
    k.params_ = {c};
    return k;
}

Coefficient Coefficient::power_at_endpoint(double lambda, double alpha, Side side,
                                           double match_radius) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("power-law exponent must be >= 0");
    if (!(match_radius > 0.0)) throw std::invalid_argument("matching radius must be > 0");
    if (lambda == 0.0) return zero();
    Coefficient k;
    k.kind_ = Kind::PowerAtEndpoint;
    k.side_ = side;
    k.params_ = {lambda, alpha, match_radius};
    return k;
}

Coefficient Coefficient::closed_form(Family f, std::vector<double> params) {
    size_t need = 0;
    switch (f) {
        case Family::Power: need = 3; break;
        case Family::Logarithmic: need = 2; break;
        case Family::Chernoff: need = 1; break;
        case Family::Sine: need = 3; break;
    }
    if (params.size() != need)
        throw std::invalid_argument(std::string("closed form '") + to_string(f) + "' expects " +
                                    std::to_string(need) + " parameters");
    if (f == Family::Power && !(params[2] >= 0.0))
        throw std::invalid_argument("power-law exponent must be >= 0");
    if (f == Family::Chernoff && !(params[0] >= 0.0))
        throw std::invalid_argument("Chernoff exponent must be >= 0");
    Coefficient k;
    k.kind_ = Kind::ClosedForm;
    k.family_ = f;
    k.params_ = std::move(params);
    return k;
}

Coefficient Coefficient::tabulated(std::vector<double> grid, std::vector<double> values) {
    if (grid.size() != values.size() || grid.size() < 2)
        throw std::invalid_argument("tabulated coefficient needs matching grid/values, size >= 2");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("tabulated grid must increase");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("tabulated values must be finite");
    Coefficient k;
    k.kind_ = Kind::Tabulated;
    k.spline_ = std::make_shared<Spline>(std::move(grid), std::move(values));
    return k;
}

Coefficient Coefficient::custom(std::string name, Fn fn, EndpointAsymptotics left,
                                EndpointAsymptotics right) {
    Coefficient k;
    k.kind_ = Kind::Custom;
    k.name_ = std::move(name);
    k.fn_ = std::make_shared<const Fn>(std::move(fn));
    k.custom_left_ = left;
    k.custom_right_ = right;
    return k;
}

double Coefficient::value(double x, const Interval& iv) const {
    switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Constant: return params_[0];
        case Kind::PowerAtEndpoint: {
            double d = iv.distance_to(side_, x);
            return params_[0] / std::pow(d, params_[1]);
        }
        case Kind::ClosedForm:
            switch (family_) {
                case Family::Power: {
                    double v = 0.0;
                    if (params_[0] != 0.0) v += params_[0] / std::pow(x - iv.a, params_[2]);
                    if (params_[1] != 0.0) v += params_[1] / std::pow(iv.b - x, params_[2]);
                    return v;
                }
                case Family::Logarithmic: {
                    double v = 0.0;
                    if (params_[0] != 0.0) v += params_[0] * std::log(x - iv.a);
                    if (params_[1] != 0.0) v += params_[1] * std::log(iv.b - x);
                    return v;
                }
                case Family::Chernoff: return std::pow(1.0 + x * x, 0.5 * params_[0]);
                case Family::Sine: return params_[0] * std::sin(params_[1] * x + params_[2]);
            }
            return 0.0;
        case Kind::Tabulated: return (*spline_)(x);
        case Kind::Custom: return (*fn_)(x);
    }
    return 0.0;
}

namespace {

EndpointAsymptotics power_term(double lambda, double alpha) {
    EndpointAsymptotics e;
    if (lambda == 0.0) return e;
    if (alpha > 1.0) {
        e.strong_order = alpha;
        e.strong_coefficient = lambda;
    } else if (alpha == 1.0) {
        e.inverse_distance = lambda;
    } else if (alpha > 0.0) {
        e.remainder = Remainder::Integrable;
    } else {
        e.remainder = Remainder::Bounded;
    }
    return e;
}

EndpointAsymptotics bounded_unless_zero(double c) {
    EndpointAsymptotics e;
    e.remainder = c == 0.0 ? Remainder::Zero : Remainder::Bounded;
    return e;
}

}  // namespace

EndpointAsymptotics Coefficient::asymptotics(Side s, const Interval& iv) const {
    bool at_infinity = s == Side::Right && iv.infinite_right();
    EndpointAsymptotics e;
    switch (kind_) {
        case Kind::Zero: return e;
        case Kind::Constant: return bounded_unless_zero(params_[0]);
        case Kind::PowerAtEndpoint:
            if (side_ == s && !at_infinity) return power_term(params_[0], params_[1]);
            e.remainder = Remainder::Bounded;
            return e;
        case Kind::ClosedForm:
            switch (family_) {
                case Family::Power: {
                    double here = s == Side::Left ? params_[0] : params_[1];
                    double there = s == Side::Left ? params_[1] : params_[0];
                    if (at_infinity) {
                        e.remainder = Remainder::Bounded;
                        return e;
                    }
                    return power_term(here, params_[2]) + bounded_unless_zero(there);
                }
                case Family::Logarithmic: {
                    if (at_infinity) {
                        e.remainder = Remainder::Unknown;
                        return e;
                    }
                    double here = s == Side::Left ? params_[0] : params_[1];
                    double there = s == Side::Left ? params_[1] : params_[0];
                    e = bounded_unless_zero(there);
                    if (here != 0.0) e.remainder = Remainder::Integrable;
                    return e;
                }
                case Family::Chernoff:
                    e.remainder = at_infinity && params_[0] != 0.0 ? Remainder::Unknown
                                                                  : Remainder::Bounded;
                    return e;
                case Family::Sine: return bounded_unless_zero(params_[0]);
            }
            return e;
        case Kind::Tabulated: e.remainder = Remainder::Bounded; return e;
        case Kind::Custom: return s == Side::Left ? custom_left_ : custom_right_;
    }
    return e;
}

std::string Coefficient::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Zero: os << "0"; break;
        case Kind::Constant: os << params_[0]; break;
        case Kind::PowerAtEndpoint:
            os << params_[0] << "/delta_" << to_string(side_) << "^" << params_[1];
            break;
        case Kind::ClosedForm:
            os << to_string(family_) << "(";
            for (size_t i = 0; i < params_.size(); ++i) os << (i ? "," : "") << params_[i];
            os << ")";
            break;
        case Kind::Tabulated: os << "table[" << spline_->x.size() << "]"; break;
        case Kind::Custom: os << name_; break;
    }
    return os.str();
}

PauliCoefficients PotentialSpec1D::at(double x) const {
    return {v0.value(x, domain), v1.value(x, domain), v2.value(x, domain), v3.value(x, domain)};
}

void PotentialSpec1D::validate() const {
    if (!(domain.a < domain.b)) throw std::invalid_argument("interval needs a < b");
    if (!std::isfinite(domain.a)) throw std::invalid_argument("left endpoint must be finite");
    for (const Coefficient* c : {&v0, &v1, &v2, &v3}) {
        if (domain.infinite_right() && c->kind() == Coefficient::Kind::PowerAtEndpoint &&
            c->side() == Side::Right)
            throw std::invalid_argument("power law at an infinite endpoint is not supported");
        if (domain.infinite_right() && c->kind() == Coefficient::Kind::ClosedForm &&
            c->family() == Family::Power && c->params()[1] != 0.0)
            throw std::invalid_argument("power law at an infinite endpoint is not supported");
    }
}

GaugeRemoval gauge_remove_v2(const PotentialSpec1D& p) {
    p.validate();
    GaugeRemoval out;
    out.potential = p;
    out.potential.v2 = Coefficient::zero();
    out.anchor = p.domain.a;
    if (p.v2.is_zero()) {
        out.phase = [](double) { return 0.0; };
        return out;
    }
    const Interval iv = p.domain;
    double hi = iv.infinite_right() ? iv.a + 10.0 : iv.b;
    for (int i = 1; i < 64; ++i) {
        double x = iv.a + (hi - iv.a) * i / 64.0;
        if (!std::isfinite(p.v2.value(x, iv)))
            throw std::invalid_argument("v2 is not locally integrable: non-finite value at x = " +
                                        std::to_string(x));
    }
    EndpointAsymptotics left = p.v2.asymptotics(Side::Left, iv);
    bool integrable_at_a = !left.has_strong_term() && left.inverse_distance == 0.0 &&
                           left.remainder != Remainder::Unknown;
    if (!integrable_at_a) out.anchor = iv.infinite_right() ? iv.a + 1.0 : 0.5 * (iv.a + iv.b);
    Coefficient v2 = p.v2;
    double anchor = out.anchor;
    out.phase = [v2, iv, anchor](double x) {
        return integrate([&](double t) { return v2.value(t, iv); }, anchor, x, 1e-13);
    };
    return out;
}

// Domain -------------------------------------------------------------------------

Domain Domain::interval(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("interval needs finite a < b");
    Domain d;
    d.kind_ = Kind::Interval;
    d.dim_ = 1;
    d.a_ = a;
    d.b_ = b;
    return d;
}

Domain Domain::unit_ball(int dim) {
    if (dim < 2 || dim > 3) throw std::invalid_argument("unit ball dimension must be 2 or 3");
    Domain d;
    d.kind_ = Kind::UnitBall;
    d.dim_ = dim;
    return d;
}

Domain Domain::punctured_unit_disk() {
    Domain d;
    d.kind_ = Kind::PuncturedUnitBall;
    d.dim_ = 2;
    return d;
}

Domain Domain::annulus(double r0) {
    if (!(r0 > 0.0 && r0 < 1.0)) throw std::invalid_argument("annulus needs 0 < r0 < 1");
    Domain d;
    d.kind_ = Kind::Annulus;
    d.dim_ = 2;
    d.r0_ = r0;
    return d;
}

Domain Domain::half_line(double a) {
    Domain d;
    d.kind_ = Kind::HalfLine;
    d.dim_ = 1;
    d.a_ = a;
    d.b_ = std::numeric_limits<double>::infinity();
    return d;
}

double Domain::distance(const Point& x) const {
    switch (kind_) {
        case Kind::Interval: return std::min(x[0] - a_, b_ - x[0]);
        case Kind::HalfLine: return x[0] - a_;
        case Kind::UnitBall: return 1.0 - x.norm();
        case Kind::PuncturedUnitBall: {
            double r = x.norm();
            return std::min(r, 1.0 - r);
        }
        case Kind::Annulus: {
            double r = x.norm();
            return std::min(r - r0_, 1.0 - r);
        }
    }
    return 0.0;
}

Point Domain::distance_gradient(const Point& x) const {
    Point g = Point::Zero(dim_);
    switch (kind_) {
        case Kind::Interval: g[0] = (x[0] - a_ <= b_ - x[0]) ? 1.0 : -1.0; return g;
        case Kind::HalfLine: g[0] = 1.0; return g;
        default: break;
    }
    double r = x.norm();
    if (r == 0.0) return g;
    Point rhat = x / r;
    switch (kind_) {
        case Kind::UnitBall: return -rhat;
        case Kind::PuncturedUnitBall: return r <= 1.0 - r ? rhat : Point(-rhat);
        case Kind::Annulus: return r - r0_ <= 1.0 - r ? rhat : Point(-rhat);
        default: return g;
    }
}

bool Domain::contains(const Point& x) const {
    if (x.size() != dim_) return false;
    return distance(x) > 0.0;
}

Interval Domain::as_interval() const {
    if (kind_ != Kind::Interval && kind_ != Kind::HalfLine)
        throw std::invalid_argument("domain is not one-dimensional");
    return Interval{a_, b_};
}

std::string Domain::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Interval: os << "interval(" << a_ << "," << b_ << ")"; break;
        case Kind::HalfLine: os << "half_line(" << a_ << ")"; break;
        case Kind::UnitBall: os << (dim_ == 2 ? "unit_disk" : "unit_ball"); break;
        case Kind::PuncturedUnitBall: os << "punctured_unit_disk"; break;
        case Kind::Annulus: os << "annulus(" << r0_ << ")"; break;
    }
    return os.str();
}

// Scalar fields ---------------------------------------------------------------------

ScalarField::ScalarField(std::string name, Fn f, Grad g)
    : name_(std::move(name)), f_(std::move(f)), g_(std::move(g)) {}

ScalarField ScalarField::numeric(std::string name, Fn f, Domain domain) {
    Fn fc = f;
    Grad g = [fc, domain](const Point& x) {
        double step = 1e-6 * domain.distance(x);
        Point grad(x.size());
        for (int j = 0; j < x.size(); ++j) {
            Point xp = x, xm = x;
            xp[j] += step;
            xm[j] -= step;
            grad[j] = (fc(xp) - fc(xm)) / (2 * step);
        }
        return grad;
    };
    return ScalarField(std::move(name), std::move(f), std::move(g));
}

ScalarField constant_field(double c, int dim) {
    return ScalarField(
        "const", [c](const Point&) { return c; },
        [dim](const Point&) { return Point(Point::Zero(dim)); });
}

ScalarField linear_field(int axis, double slope, double offset, int dim) {
    return ScalarField(
        "linear", [=](const Point& x) { return offset + slope * x[axis]; },
        [=](const Point&) {
            Point g = Point::Zero(dim);
            g[axis] = slope;
            return g;
        });
}

ScalarField distance_power(const Domain& d, double lambda, double alpha) {
    return distance_profile(
        d, "distance_power", [=](double t) { return lambda * std::pow(t, -alpha); },
        [=](double t) { return -alpha * lambda * std::pow(t, -alpha - 1.0); });
}

ScalarField distance_profile(const Domain& d, std::string name, std::function<double(double)> f,
                             std::function<double(double)> df) {
    return ScalarField(
        std::move(name), [d, f](const Point& x) { return f(d.distance(x)); },
        [d, df](const Point& x) { return Point(df(d.distance(x)) * d.distance_gradient(x)); });
}

ScalarField log_distance(const Domain& d) {
    return distance_profile(
        d, "ln_delta", [](double t) { return std::log(t); }, [](double t) { return 1.0 / t; });
}

// Dirac coefficients ---------------------------------------------------------------

DiracCoefficients DiracCoefficients::pauli_1d() {
    DiracCoefficients c;
    c.kinetic_ = {HermitianMatrix::sigma(2)};
    return c;
}

DiracCoefficients DiracCoefficients::pauli_2d() {
    DiracCoefficients c;
    c.kinetic_ = {HermitianMatrix::sigma(1), HermitianMatrix::sigma(2)};
    return c;
}

DiracCoefficients DiracCoefficients::dirac_3d() {
    DiracCoefficients c;
    c.kinetic_ = {HermitianMatrix::alpha(1), HermitianMatrix::alpha(2), HermitianMatrix::alpha(3)};
    return c;
}

DiracCoefficients DiracCoefficients::with_potential(std::vector<PotentialTerm> terms) const {
    for (const auto& t : terms)
        if (t.structure.dimension() != spinor_dimension())
            throw std::invalid_argument("potential term has the wrong spinor dimension");
    DiracCoefficients c = *this;
    c.terms_ = std::move(terms);
    return c;
}

CMat DiracCoefficients::potential(const Point& x) const {
    int k = spinor_dimension();
    CMat v = CMat::Zero(k, k);
    for (const auto& t : terms_) v += t.field(x) * t.structure.matrix();
    return v;
}

std::vector<CMat> DiracCoefficients::potential_gradient(const Point& x) const {
    int k = spinor_dimension();
    std::vector<CMat> g(dimension(), CMat::Zero(k, k));
    for (const auto& t : terms_) {
        Point gr = t.field.gradient(x);
        for (int j = 0; j < dimension(); ++j) g[j] += gr[j] * t.structure.matrix();
    }
    return g;
}

CMat DiracCoefficients::symbol(const Point& xi) const {
    int k = spinor_dimension();
    CMat s = CMat::Zero(k, k);
    for (int j = 0; j < dimension(); ++j) s += xi[j] * kinetic_[j].matrix();
    return s;
}

HermitianMatrix DiracCoefficients::scalar_structure() const {
    switch (dimension()) {
        case 1: return HermitianMatrix::sigma(1);
        case 2: return HermitianMatrix::sigma(3);
        default: return HermitianMatrix::beta();
    }
}

double operator_norm(const CMat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

ScalarCheck is_scalar_potential(const DiracCoefficients& c, const std::vector<Point>& samples) {
    if (samples.empty()) throw std::invalid_argument("scalar check needs at least one sample");
    ScalarCheck r;
    for (const auto& x : samples) {
        CMat v = c.potential(x);
        for (const auto& a : c.kinetic()) {
            CMat ac = a.matrix() * v + v * a.matrix();
            r.max_norm = std::max(r.max_norm, operator_norm(ac));
        }
    }
    r.scalar = r.max_norm <= 1e-12;
    return r;
}

Eigen::MatrixXd velocity_matrix(const DiracCoefficients& c, const Point&) {
    int d = c.dimension();
    Eigen::MatrixXd m(d, d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            m(j, k) = (c.kinetic()[j].matrix() * c.kinetic()[k].matrix()).trace().real();
    return m;
}

}  // namespace confine
