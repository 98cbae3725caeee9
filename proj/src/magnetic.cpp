#include "confine/magnetic.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace confine {

namespace {

const cplx I(0.0, 1.0);

// Gauss-Legendre, 5 nodes on [-1, 1]; exact for cubic splines.
constexpr double kGL5x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                             0.9061798459386640};
constexpr double kGL5w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                             0.4786286704993665, 0.2369268850561891};

double gl5(const std::function<double(double)>& f, double a, double b) {
    double m = 0.5 * (a + b), s = 0.5 * (b - a), sum = 0.0;
    for (int i = 0; i < 5; ++i) sum += kGL5w[i] * f(m + s * kGL5x[i]);
    return s * sum;
}

// (1/r)(1/(1-r) + ln(1-r) - 1) = sum_{k>=1} k r^k / (k+1)
double critical_profile(double r) {
    if (r < 0.1) {
        double sum = 0.0, rk = r;
        for (int k = 1; k < 40; ++k) {
            double term = k * rk / (k + 1);
            sum += term;
            if (term < 1e-18 * sum) break;
            rk *= r;
        }
        return sum;
    }
    return (1.0 / (1.0 - r) + std::log1p(-r) - 1.0) / r;
}

}  // namespace

// Field catalog --------------------------------------------------------------------

MagneticField2D MagneticField2D::constant(double b0) {
    if (!std::isfinite(b0)) throw std::invalid_argument("field strength must be finite");
    MagneticField2D f;
    f.kind_ = Kind::Constant;
    f.param_ = b0;
    return f;
}

MagneticField2D MagneticField2D::critical_family(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("critical-family strength must be >= 0");
    MagneticField2D f;
    f.kind_ = Kind::CriticalFamily;
    f.param_ = alpha;
    return f;
}

MagneticField2D MagneticField2D::boundary_power(double lambda) {
    if (!std::isfinite(lambda)) throw std::invalid_argument("field strength must be finite");
    MagneticField2D f;
    f.kind_ = Kind::BoundaryPower;
    f.param_ = lambda;
    return f;
}

MagneticField2D MagneticField2D::tabulated(std::vector<double> r, std::vector<double> b) {
    if (r.empty() || r.front() < 0.0 || r.back() >= 1.0)
        throw std::invalid_argument("tabulated field grid must lie in [0, 1)");
    MagneticField2D f;
    f.kind_ = Kind::Tabulated;
    // Interpolating in s = r^2 keeps B(|x|) smooth at the origin.
    std::vector<double> s(r.size());
    for (size_t i = 0; i < r.size(); ++i) s[i] = r[i] * r[i];
    f.spline_ = Coefficient::tabulated(s, b);
    f.grid_ = std::move(r);
    f.values_ = std::move(b);
    return f;
}

double MagneticField2D::operator()(double r) const {
    switch (kind_) {
        case Kind::Constant: return param_;
        case Kind::CriticalFamily: return param_ / ((1.0 - r) * (1.0 - r));
        case Kind::BoundaryPower: return param_ * (2.0 - r) / ((1.0 - r) * (1.0 - r));
        case Kind::Tabulated: return spline_->value(r * r, Interval{0.0, 1.0});
    }
    return 0.0;
}

std::string MagneticField2D::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Constant: os << "constant(" << param_ << ")"; break;
        case Kind::CriticalFamily: os << "critical(" << param_ << ")"; break;
        case Kind::BoundaryPower: os << "boundary_power(" << param_ << ")"; break;
        case Kind::Tabulated: os << "tabulated[" << grid_.size() << "]"; break;
    }
    return os.str();
}

// Gauge ----------------------------------------------------------------------------

TransversalGauge transversal_gauge(const MagneticField2D& b) {
    TransversalGauge g;
    g.field = b;
    double p = b.parameter();
    switch (b.kind()) {
        case MagneticField2D::Kind::Constant:
            g.a = [p](double r) { return 0.5 * p * r; };
            break;
        case MagneticField2D::Kind::CriticalFamily:
            g.a = [p](double r) { return p == 0.0 ? 0.0 : p * critical_profile(r); };
            break;
        case MagneticField2D::Kind::BoundaryPower:
            g.a = [p](double r) { return p * r / (1.0 - r); };
            break;
        case MagneticField2D::Kind::Tabulated: {
            g.analytic = false;
            // integral_0^r y B(y) dy = (1/2) integral_0^{r^2} S(s) ds with S the cubic
            // spline in s, integrated exactly segment by segment (constant extension
            // below the first knot and beyond the last).
            std::vector<double> knots;
            for (double r : b.grid()) knots.push_back(r * r);
            auto S = [b](double s) { return b(std::sqrt(s)); };
            std::vector<double> cumulative(knots.size());
            cumulative[0] = S(knots[0]) * knots[0];
            for (size_t k = 1; k < knots.size(); ++k)
                cumulative[k] = cumulative[k - 1] + gl5(S, knots[k - 1], knots[k]);
            g.a = [knots, cumulative, S](double r) {
                if (r <= 0.0) return 0.0;
                double s = r * r;
                if (s <= knots[0]) return 0.5 * S(knots[0]) * r;
                auto it = std::upper_bound(knots.begin(), knots.end(), s);
                size_t k = static_cast<size_t>(it - knots.begin()) - 1;
                double q = cumulative[k];
                if (k + 1 < knots.size())
                    q += gl5(S, knots[k], s);
                else
                    q += S(knots.back()) * (s - knots.back());
                return 0.5 * q / r;
            };
            break;
        }
    }
    for (double r : {0.25, 0.5, 0.75, 0.9})
        if (!std::isfinite(g.a(r)))
            throw std::domain_error("transversal gauge is not finite at r = " + std::to_string(r));
    return g;
}

Coefficient TransversalGauge::as_coefficient() const {
    EndpointAsymptotics left, right;
    left.remainder = Remainder::Bounded;
    right.remainder = Remainder::Bounded;
    switch (field.kind()) {
        case MagneticField2D::Kind::Constant:
            if (field.parameter() == 0.0) return Coefficient::zero();
            break;
        case MagneticField2D::Kind::CriticalFamily:
            if (field.parameter() == 0.0) return Coefficient::zero();
            // alpha/delta + alpha ln(delta) + O(1)
            right.inverse_distance = field.parameter();
            right.remainder = Remainder::Integrable;
            break;
        case MagneticField2D::Kind::BoundaryPower:
            if (field.parameter() == 0.0) return Coefficient::zero();
            right.inverse_distance = field.parameter();
            break;
        case MagneticField2D::Kind::Tabulated: break;
    }
    return Coefficient::custom("a[" + field.describe() + "]", a, left, right);
}

std::function<double(double)> field_from_gauge(const TransversalGauge& g) {
    auto a = g.a;
    return [a](double r) {
        // B = (1/r) d(r a)/dr = 2c + r c' with c = a/r, smooth at r = 0
        auto c = [&a](double s) { return a(s) / s; };
        if (r < 1e-9) return 2.0 * c(1e-9);
        double h = std::min({1e-5, 0.2 * r, 5e-3 * (1.0 - r)});
        double dc = (c(r - 2 * h) - 8 * c(r - h) + 8 * c(r + h) - c(r + 2 * h)) / (12 * h);
        return 2.0 * c(r) + r * dc;
    };
}

// Fibers ---------------------------------------------------------------------------

double half_integer_momentum(int j) { return (2.0 * j + 1.0) / 2.0; }

RadialDiracProblem fiber_problem(const TransversalGauge& g, int j,
                                 const std::optional<Coefficient>& v_s,
                                 const std::optional<Coefficient>& v_e) {
    RadialDiracProblem p;
    p.potential.domain = Interval{0.0, 1.0};
    Coefficient a = g.as_coefficient();
    if (!a.is_zero()) p.magnetic = a;
    p.angular = half_integer_momentum(j);
    if (v_s) p.potential.v3 = *v_s;
    if (v_e) p.potential.v0 = *v_e;
    return p;
}

RadialDiracProblem free_plane_fiber(int j) {
    RadialDiracProblem p;
    p.potential.domain = Interval{0.0, std::numeric_limits<double>::infinity()};
    p.angular = (2.0 * j - 1.0) / 2.0;
    return p;
}

RadialDiracProblem cylinder_fiber(const TransversalGauge& g, int j, double xi) {
    return fiber_problem(g, j, Coefficient::constant(xi));
}

// Partial waves --------------------------------------------------------------------

FiberVerdictTable partial_wave_verdict(const MagneticField2D& b, const PartialWaveOptions& opt,
                                       const std::optional<Coefficient>& v_s,
                                       const std::optional<Coefficient>& v_e) {
    if (opt.j_range < 1) throw std::invalid_argument("j range must be >= 1");
    TransversalGauge g = transversal_gauge(b);
    FiberVerdictTable table;
    table.j_range = opt.j_range;
    int n = 2 * opt.j_range;
    table.rows.resize(n);
    detail::parallel_for(n, opt.threads, [&](int i) {
        int j = -opt.j_range + i;
        RadialDiracProblem p = fiber_problem(g, j, v_s, v_e);
        ClassifyOptions right_opt = opt.classify;
        if (opt.numerical_at_boundary) right_opt.force = ForceMethod::Numerical;
        FiberRow row;
        row.j = j;
        row.m = half_integer_momentum(j);
        row.verdict = combine_classifications(endpoint_class(p, Side::Left, opt.classify),
                                              endpoint_class(p, Side::Right, right_opt));
        table.rows[i] = std::move(row);
    });

    table.boundary_classes_uniform = true;
    for (const auto& row : table.rows)
        if (row.verdict.right->cls != table.rows.front().verdict.right->cls)
            table.boundary_classes_uniform = false;

    // Order of preference for the reported fiber: smallest |m_j|, then negative j.
    auto better = [](const FiberRow& x, const FiberRow& y) {
        if (std::fabs(x.m) != std::fabs(y.m)) return std::fabs(x.m) < std::fabs(y.m);
        return x.j < y.j;
    };
    const FiberRow* failing = nullptr;
    const FiberRow* undecided = nullptr;
    bool all_esa = true;
    for (const auto& row : table.rows) {
        if (row.verdict.verdict == Verdict::NotEssentiallySelfAdjoint &&
            (!failing || better(row, *failing)))
            failing = &row;
        if (row.verdict.verdict == Verdict::Inconclusive && (!undecided || better(row, *undecided)))
            undecided = &row;
        if (row.verdict.verdict != Verdict::EssentiallySelfAdjoint) all_esa = false;
    }
    if (failing) {
        table.aggregate = Verdict::NotEssentiallySelfAdjoint;
        table.failing_fiber = failing->j;
        table.rule = b.kind() == MagneticField2D::Kind::CriticalFamily ? Rule::CriticalField
                                                                        : Rule::PartialWaves;
        table.note = "fiber j = " + std::to_string(failing->j) + " is not essentially self-adjoint";
    } else if (all_esa && table.boundary_classes_uniform) {
        table.aggregate = Verdict::EssentiallySelfAdjoint;
        bool pure_field = !v_s && !v_e;
        table.rule = pure_field && boundary_field_certificate(b, 0.1).holds ? Rule::BoundaryField
                                                                           : Rule::PartialWaves;
        table.note = "all fibers |j| <= " + std::to_string(opt.j_range) +
                     " limit point at both ends; higher fibers covered by the uniform r = 1 class";
    } else {
        table.aggregate = Verdict::Inconclusive;
        if (undecided) table.failing_fiber = undecided->j;
        table.note = undecided ? "fiber j = " + std::to_string(undecided->j) + " inconclusive"
                               : "r = 1 classes differ between fibers";
    }
    return table;
}

BoundaryFieldCertificate boundary_field_certificate(const MagneticField2D& b, double delta0) {
    if (!(delta0 > 0.0 && delta0 < 1.0)) throw std::invalid_argument("delta0 must lie in (0, 1)");
    BoundaryFieldCertificate c;
    const int n = 200;
    const double lo = std::log(1e-8), hi = std::log(std::max(delta0, 1e-8));
    c.worst_ratio = std::numeric_limits<double>::infinity();
    int sign = 0;
    for (int i = 0; i < n; ++i) {
        double r = 1.0 - std::exp(lo + (hi - lo) * i / (n - 1));
        double d = 1.0 - r;
        double v = b(r);
        int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign)) {
            c.failure_r = r;
            c.reason = "field changes sign or vanishes in the boundary layer at r = " +
                       std::to_string(r);
            c.worst_ratio = std::min(c.worst_ratio, 0.0);
            return c;
        }
        sign = s;
        double ratio = 2.0 * d * d * std::fabs(v);
        if (ratio < c.worst_ratio) {
            c.worst_ratio = ratio;
            if (ratio < 1.0 - 1e-12) c.failure_r = r;
        }
    }
    c.holds = c.worst_ratio >= 1.0 - 1e-12;
    if (!c.holds)
        c.reason = "|B| (1 - r)^2 falls below 1/2 (min 2 delta^2 |B| = " +
                   std::to_string(c.worst_ratio) + ")";
    return c;
}

double boundary_exponent(const MagneticField2D& b, int j, const SolverOptions& opt) {
    RadialDiracProblem p = fiber_problem(transversal_gauge(b), j);
    return count_l2_solutions(p, Side::Right, opt).tails[0].exponent;
}

TransitionBracket critical_strength_bisection(std::function<MagneticField2D(double)> family, int j,
                                              double lo, double hi, double tol,
                                              const SolverOptions& opt) {
    auto limit_point = [&](double s) { return boundary_exponent(family(s), j, opt) < -1.0; };
    if (limit_point(lo) || !limit_point(hi))
        throw std::invalid_argument("bisection bracket must go from limit circle to limit point");
    TransitionBracket br{lo, hi, 0};
    while (br.hi - br.lo > tol && br.iterations < 60) {
        double mid = br.estimate();
        (limit_point(mid) ? br.hi : br.lo) = mid;
        ++br.iterations;
    }
    return br;
}

// Finite-difference identities -------------------------------------------------------

namespace {

double bump(double s2) { return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0; }

cplx test_function(int k, double x, double y) {
    auto b = [&](double cx, double cy, double R) {
        double dx = (x - cx) / R, dy = (y - cy) / R;
        return bump(dx * dx + dy * dy);
    };
    switch (k) {
        case 0: return b(0.0, 0.0, 0.6);
        case 1: return b(0.2, 0.1, 0.4) * std::exp(I * (3.0 * x));
        case 2: return b(-0.3, 0.2, 0.3) * (1.0 + y);
        case 3: return b(0.1, -0.35, 0.3) * cplx(x, y);
        case 4: return b(-0.25, -0.25, 0.3) * std::cos(2.0 * x + y);
    }
    return 0.0;
}

constexpr int kTestFunctions = 5;

struct Grid2D {
    int n;
    double h, x0;
    std::vector<double> A1, A2, B;

    Grid2D(const TransversalGauge& g, double h_) : h(h_), x0(-0.75) {
        n = static_cast<int>(std::lround(1.5 / h)) + 1;
        A1.resize(n * n);
        A2.resize(n * n);
        B.resize(n * n);
        double c0 = 0.5 * g.field(0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double x = coord(i), y = coord(j);
                double r = std::hypot(x, y);
                double c = r > 0.0 ? g.a(r) / r : c0;
                A1[idx(i, j)] = -c * y;
                A2[idx(i, j)] = c * x;
                B[idx(i, j)] = g.field(r);
            }
    }
    double coord(int i) const { return x0 + i * h; }
    int idx(int i, int j) const { return i * n + j; }

    // Pi_axis u = -i d_axis u - A_axis u with centered differences, zero outside.
    std::vector<cplx> pi(const std::vector<cplx>& u, int axis) const {
        std::vector<cplx> out(u.size());
        const auto& A = axis == 0 ? A1 : A2;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                auto at = [&](int ii, int jj) {
                    return (ii < 0 || jj < 0 || ii >= n || jj >= n) ? cplx(0) : u[idx(ii, jj)];
                };
                cplx d = axis == 0 ? (at(i + 1, j) - at(i - 1, j)) : (at(i, j + 1) - at(i, j - 1));
                out[idx(i, j)] = -I * d / (2 * h) - A[idx(i, j)] * u[idx(i, j)];
            }
        return out;
    }

    std::vector<cplx> sample(int k) const {
        std::vector<cplx> u(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) u[idx(i, j)] = test_function(k, coord(i), coord(j));
        return u;
    }
};

std::vector<cplx> combine(const std::vector<cplx>& a, cplx s, const std::vector<cplx>& b) {
    std::vector<cplx> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
}

}  // namespace

int test_function_count() { return kTestFunctions; }

SusyResidual susy_factorization_residual(const TransversalGauge& g, double h) {
    if (!(h > 0.0 && h <= 0.1)) throw std::invalid_argument("grid step must lie in (0, 0.1]");
    Grid2D grid(g, h);
    SusyResidual res;
    res.h = h;
    for (int k = 0; k < kTestFunctions; ++k) {
        auto u = grid.sample(k);
        auto p1 = grid.pi(u, 0), p2 = grid.pi(u, 1);
        auto dplus = combine(p1, I, p2), dminus = combine(p1, -I, p2);
        auto lhs_plus = combine(grid.pi(dplus, 0), -I, grid.pi(dplus, 1));    // D- D+ u
        auto lhs_minus = combine(grid.pi(dminus, 0), I, grid.pi(dminus, 1));  // D+ D- u
        auto lap = combine(grid.pi(p1, 0), 1.0, grid.pi(p2, 1));
        double rp = 0.0, rm = 0.0;
        for (int i = 2; i < grid.n - 2; ++i)
            for (int j = 2; j < grid.n - 2; ++j) {
                int q = grid.idx(i, j);
                rp = std::max(rp, std::abs(lhs_plus[q] - (lap[q] - grid.B[q] * u[q])));
                rm = std::max(rm, std::abs(lhs_minus[q] - (lap[q] + grid.B[q] * u[q])));
            }
        res.plus_by_function.push_back(rp);
        res.minus_by_function.push_back(rm);
        res.plus = std::max(res.plus, rp);
        res.minus = std::max(res.minus, rm);
    }
    return res;
}

DiamagneticCheck diamagnetic_check(const TransversalGauge& g, double h) {
    if (!(h > 0.0 && h <= 0.1)) throw std::invalid_argument("grid step must lie in (0, 0.1]");
    Grid2D grid(g, h);
    DiamagneticCheck out;
    for (int k = 0; k < kTestFunctions; ++k) {
        auto u = grid.sample(k);
        auto p1 = grid.pi(u, 0), p2 = grid.pi(u, 1);
        cplx field = 0.0;
        double kinetic = 0.0;
        for (size_t q = 0; q < u.size(); ++q) {
            field += std::conj(u[q]) * grid.B[q] * u[q];
            kinetic += std::norm(p1[q]) + std::norm(p2[q]);
        }
        double f = std::abs(field) * h * h, kin = kinetic * h * h;
        out.field_term.push_back(f);
        out.kinetic_term.push_back(kin);
        if (f > kin) out.holds = false;
    }
    return out;
}

}  // namespace confine
