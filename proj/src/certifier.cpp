#include "confine/certifier.hpp"

#include "linefit.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace confine {

namespace {

const cplx I(0.0, 1.0);

constexpr double kHermitianTolerance = 1e-12;
constexpr double kZeroEigenvalue = 1e-10;
constexpr double kSlopeTolerance = 0.05;

Point point1(double x) {
    Point p(1);
    p << x;
    return p;
}

Point point2(double x, double y) {
    Point p(2);
    p << x, y;
    return p;
}

std::vector<Point> sphere_directions(int dim, int m, int shell) {
    std::vector<Point> out;
    if (dim == 1) {
        out.push_back(point1(-1.0));
        out.push_back(point1(1.0));
        return out;
    }
    if (dim == 2) {
        for (int i = 0; i < m; ++i) {
            double th = 2 * kPi * (i + 0.5 * (shell % 2)) / m;
            out.push_back(point2(std::cos(th), std::sin(th)));
        }
        return out;
    }
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / m;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double ph = golden * i + 0.5 * shell;
        Point p(3);
        p << r * std::cos(ph), r * std::sin(ph), z;
        out.push_back(p);
    }
    return out;
}

struct Evaluation {
    double min_eig = 0.0;
    double scale = 0.0;
    bool ok = true;
};

Evaluation smallest_eigenvalue(const CMat& m) {
    Evaluation e;
    if (!m.allFinite()) {
        e.ok = false;
        return e;
    }
    double norm = operator_norm(m);
    double dev = operator_norm(m - m.adjoint());
    if (dev > kHermitianTolerance * std::max(1.0, norm))
        throw SymmetryViolation("certificate matrix is not Hermitian", dev);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        e.ok = false;
        return e;
    }
    e.min_eig = es.eigenvalues().minCoeff();
    e.scale = es.eigenvalues().cwiseAbs().maxCoeff();
    return e;
}

// Smallest eigenvalues of `matrix` over the grid. `floor` > 0 asks for Certified(floor)
// on the two innermost decades; floor = 0 asks for positive semidefiniteness only.
CertificateReport evaluate(const BoundaryLayerGrid& g, Rule rule,
                           const std::function<CMat(const Point&)>& matrix, double floor) {
    CertificateReport r;
    r.rule = rule;
    r.grid = g.describe();
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    double inner_min = std::numeric_limits<double>::infinity();
    double inner_limit = g.delta_min * 100.0 * (1.0 + 1e-12);
    bool negative = false, failed = false;
    double worst = 0.0;
    for (const auto& shell : g.shells) {
        double smin = std::numeric_limits<double>::infinity();
        for (const auto& x : shell.points) {
            Evaluation e = smallest_eigenvalue(matrix(x));
            if (!e.ok) {
                failed = true;
                continue;
            }
            double lam = e.min_eig;
            if (std::fabs(lam) <= kZeroEigenvalue * e.scale) lam = 0.0;
            smin = std::min(smin, lam);
            if (lam < 0.0 && lam < worst) {
                worst = lam;
                negative = true;
                r.witness = x;
                r.witness_delta = shell.delta;
            }
        }
        r.shell_min.push_back(smin);
        r.min_eigenvalue = std::min(r.min_eigenvalue, smin);
        if (shell.delta <= inner_limit) inner_min = std::min(inner_min, smin);
    }
    std::ostringstream note;
    if (negative) {
        r.outcome = CertificateOutcome::Falsified;
        note << "negative eigenvalue " << worst << " at delta = " << r.witness_delta
             << "; the hypothesis fails on the grid, which says nothing against self-adjointness";
    } else if (failed) {
        r.outcome = CertificateOutcome::Inconclusive;
        note << "eigenvalue evaluation failed at some grid points";
    } else if (floor > 0.0) {
        if (inner_min >= floor) {
            r.outcome = CertificateOutcome::Certified;
            r.constant = floor;
        } else {
            r.outcome = CertificateOutcome::Inconclusive;
            note << "non-negative, but the smallest eigenvalue on the two innermost decades is "
                 << inner_min << " < " << floor;
        }
    } else {
        r.outcome = CertificateOutcome::Certified;
        r.constant = std::max(0.0, r.min_eigenvalue);
    }
    r.note = note.str();
    return r;
}

void require_scalar(const DiracCoefficients& op, const BoundaryLayerGrid& g, const char* what) {
    if (op.dimension() != g.domain.dimension())
        throw std::invalid_argument("operator and grid dimensions differ");
    ScalarCheck sc = is_scalar_potential(op, g.all_points());
    if (!sc.scalar) {
        std::ostringstream os;
        os << what << " is not a scalar potential (anticommutator norm " << sc.max_norm << ")";
        throw RejectedInput(os.str());
    }
}

// sum_j (A^j dV_j - dV_j A^j)
CMat commutator_sum(const DiracCoefficients& op, const std::vector<CMat>& dv) {
    int k = op.spinor_dimension();
    CMat s = CMat::Zero(k, k);
    for (int j = 0; j < op.dimension(); ++j) {
        const CMat& a = op.kinetic()[j].matrix();
        s += a * dv[j] - dv[j] * a;
    }
    return s;
}

CMat scalar_matrix(const DiracCoefficients& op, const Domain& d, const Point& x, double hardy) {
    int k = op.spinor_dimension();
    double delta = d.distance(x);
    Point grad_h = d.distance_gradient(x) / delta;
    CMat s = op.symbol(grad_h);
    CMat v = op.potential(x);
    CMat m = hardy * CMat::Identity(k, k) + v * v;
    m -= 0.5 * I * commutator_sum(op, op.potential_gradient(x));
    m -= I * (s * v - v * s);
    m -= s * s;
    return m;
}

double log_slope(const std::vector<double>& log_delta, const std::vector<double>& values) {
    std::vector<double> ys;
    ys.reserve(values.size());
    for (double v : values) ys.push_back(std::log(v));
    return detail::fit_line(log_delta, ys).slope;
}

}  // namespace

BoundaryLayerGrid BoundaryLayerGrid::make(const Domain& d, double delta_min, double delta0,
                                          int shells, int angular) {
    if (!(delta_min > 0.0) || !(delta0 > delta_min))
        throw std::invalid_argument("need 0 < delta_min < delta0");
    if (shells < 2) throw std::invalid_argument("need at least two shells");
    if (angular < 0) throw std::invalid_argument("angular sample count must be non-negative");

    double limit = 0.0;
    switch (d.kind()) {
        case Domain::Kind::Interval: limit = 0.5 * d.as_interval().length(); break;
        case Domain::Kind::HalfLine: limit = std::numeric_limits<double>::infinity(); break;
        case Domain::Kind::UnitBall: limit = 1.0; break;
        case Domain::Kind::PuncturedUnitBall: limit = 0.5; break;
        case Domain::Kind::Annulus: limit = 0.5 * (1.0 - d.inner_radius()); break;
    }
    if (!(delta0 < limit))
        throw std::invalid_argument("delta0 must be below half the width of the domain");

    BoundaryLayerGrid g;
    g.domain = d;
    g.delta_min = delta_min;
    g.delta0 = delta0;
    int m = angular;
    if (m == 0) {
        if (d.kind() == Domain::Kind::Interval) m = 2;
        else if (d.kind() == Domain::Kind::HalfLine) m = 1;
        else m = 32;
    }
    for (int k = 0; k < shells; ++k) {
        Shell s;
        s.delta = delta0 * std::pow(delta_min / delta0, static_cast<double>(k) / (shells - 1));
        double dl = s.delta;
        switch (d.kind()) {
            case Domain::Kind::Interval: {
                Interval iv = d.as_interval();
                s.points.push_back(point1(iv.a + dl));
                if (m > 1) s.points.push_back(point1(iv.b - dl));
                break;
            }
            case Domain::Kind::HalfLine:
                s.points.push_back(point1(d.as_interval().a + dl));
                break;
            case Domain::Kind::UnitBall:
                for (const auto& u : sphere_directions(d.dimension(), m, k))
                    s.points.push_back((1.0 - dl) * u);
                break;
            case Domain::Kind::PuncturedUnitBall:
            case Domain::Kind::Annulus: {
                double inner = d.kind() == Domain::Kind::Annulus ? d.inner_radius() : 0.0;
                int m_in = std::max(1, m / 2), m_out = std::max(1, m - m / 2);
                for (const auto& u : sphere_directions(d.dimension(), m_in, k))
                    s.points.push_back((inner + dl) * u);
                for (const auto& u : sphere_directions(d.dimension(), m_out, k))
                    s.points.push_back((1.0 - dl) * u);
                break;
            }
        }
        g.shells.push_back(std::move(s));
    }
    return g;
}

std::vector<Point> BoundaryLayerGrid::all_points() const {
    std::vector<Point> out;
    for (const auto& s : shells) out.insert(out.end(), s.points.begin(), s.points.end());
    return out;
}

std::size_t BoundaryLayerGrid::point_count() const {
    std::size_t n = 0;
    for (const auto& s : shells) n += s.points.size();
    return n;
}

std::string BoundaryLayerGrid::describe() const {
    std::ostringstream os;
    os << domain.describe() << ", delta in [" << delta_min << ", " << delta0 << "], "
       << shells.size() << " shells, " << point_count() << " points";
    return os.str();
}

const char* to_string(CertificateOutcome o) {
    switch (o) {
        case CertificateOutcome::Certified: return "Certified";
        case CertificateOutcome::Falsified: return "Falsified";
        case CertificateOutcome::Inconclusive: return "Inconclusive";
    }
    return "?";
}

HardyFunction convex_flat_hardy(const Domain& d, double h0) {
    if (h0 > 0.0) throw std::invalid_argument("h0 must be non-positive");
    return [d, h0](const Point& x) {
        double delta = d.distance(x);
        return 0.25 / (delta * delta) - h0;
    };
}

CertificateReport scalar_certificate(const DiracCoefficients& op, const BoundaryLayerGrid& g) {
    require_scalar(op, g, "V");
    const Domain& d = g.domain;
    return evaluate(g, Rule::ScalarCertificate,
                    [&](const Point& x) { return scalar_matrix(op, d, x, 0.0); },
                    kCertificateFloor);
}

CertificateReport hardy_certificate(const DiracCoefficients& op, const HardyFunction& hardy,
                                    const BoundaryLayerGrid& g) {
    require_scalar(op, g, "V");
    const Domain& d = g.domain;
    return evaluate(g, Rule::HardyCertificate,
                    [&](const Point& x) { return scalar_matrix(op, d, x, hardy(x)); },
                    kCertificateFloor);
}

CertificateReport perturbation_certificate(const DiracCoefficients& scalar_part,
                                           const DiracCoefficients& w, const HardyFunction& h0,
                                           double c, const BoundaryLayerGrid& g) {
    if (!(c > 0.0) || c > 1.0) throw std::invalid_argument("C must lie in (0, 1]");
    require_scalar(scalar_part, g, "V_s");
    if (w.spinor_dimension() != scalar_part.spinor_dimension())
        throw std::invalid_argument("W and V_s act on different spinor spaces");
    int k = scalar_part.spinor_dimension();
    Rule rule = c == 1.0 ? Rule::PerturbationWust : Rule::PerturbationKato;
    return evaluate(
        g, rule,
        [&](const Point& x) {
            CMat v = scalar_part.potential(x);
            CMat z = h0(x) * CMat::Identity(k, k) + v * v;
            z -= 0.5 * I * commutator_sum(scalar_part, scalar_part.potential_gradient(x));
            CMat ww = w.potential(x);
            return CMat(c * z - ww * ww);
        },
        0.0);
}

DistanceThresholdCertificate flat_threshold_certificate(const DiracCoefficients& free_op,
                                                        double lambda,
                                                        const BoundaryLayerGrid& g) {
    const Domain& d = g.domain;
    if (d.kind() == Domain::Kind::PuncturedUnitBall || d.kind() == Domain::Kind::Annulus)
        throw std::invalid_argument("the flat threshold certificate needs a convex domain");
    if (!free_op.terms().empty())
        throw std::invalid_argument("pass the free operator; the potential is built from lambda");
    DistanceThresholdCertificate out;
    out.lambda = lambda;
    double sign = lambda < 0.0 ? -1.0 : 1.0;
    out.shift = std::max(0.0, 2.0 - std::fabs(lambda));
    HermitianMatrix s = free_op.scalar_structure();
    auto vs = free_op.with_potential(
        {{s, distance_power(d, sign * (std::fabs(lambda) + out.shift), 1.0)}});
    auto w = free_op.with_potential({{s, distance_power(d, -sign * out.shift, 1.0)}});
    HardyFunction hardy = convex_flat_hardy(d);
    out.scalar_part = hardy_certificate(vs, hardy, g);
    out.perturbation = perturbation_certificate(vs, w, hardy, 1.0, g);
    auto a = out.scalar_part.outcome, b = out.perturbation.outcome;
    if (a == CertificateOutcome::Certified && b == CertificateOutcome::Certified)
        out.outcome = CertificateOutcome::Certified;
    else if (a == CertificateOutcome::Falsified || b == CertificateOutcome::Falsified)
        out.outcome = CertificateOutcome::Falsified;
    else
        out.outcome = CertificateOutcome::Inconclusive;
    std::ostringstream os;
    os << "split with shift a = " << out.shift << ": V_s " << to_string(a) << ", W "
       << to_string(b);
    out.note = os.str();
    return out;
}

ClassMembership class_membership_alpha(const ScalarField& v, double alpha,
                                       const BoundaryLayerGrid& g) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
    ClassMembership out;
    std::size_t first = g.shells.size() / 2;
    std::vector<double> log_delta;
    std::vector<double> lower, value_max, grad_max;
    for (std::size_t k = first; k < g.shells.size(); ++k) {
        const auto& shell = g.shells[k];
        double lo = std::numeric_limits<double>::infinity(), vmax = 0.0, gmax = 0.0;
        for (const auto& x : shell.points) {
            double val = std::fabs(v(x));
            double gr = v.gradient(x).norm();
            if (!std::isfinite(val) || !std::isfinite(gr)) {
                out.inconclusive = true;
                out.failures.push_back("non-finite value or gradient");
                return out;
            }
            lo = std::min(lo, val);
            vmax = std::max(vmax, val);
            gmax = std::max(gmax, gr);
        }
        log_delta.push_back(std::log(shell.delta));
        lower.push_back(lo * std::pow(shell.delta, alpha));
        value_max.push_back(vmax);
        grad_max.push_back(gmax);
    }

    // running envelopes from the outer shells inward
    std::vector<double> env_lower = lower;
    for (std::size_t i = 1; i < env_lower.size(); ++i)
        env_lower[i] = std::min(env_lower[i], env_lower[i - 1]);
    out.c_lower = env_lower.back();
    bool lower_ok = out.c_lower > 0.0 && log_slope(log_delta, env_lower) <= kSlopeTolerance;
    if (!lower_ok) out.failures.push_back("lower bound");

    auto upper_envelope = [&](const std::vector<double>& raw, double power) {
        std::vector<double> env(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            double scaled = raw[i] * std::exp(power * log_delta[i]);
            env[i] = i == 0 ? scaled : std::max(scaled, env[i - 1]);
        }
        return env;
    };

    const double eps_list[] = {alpha - 1.0, 0.5 * (alpha - 1.0), 0.25 * (alpha - 1.0)};
    bool upper_seen = false, grad_seen = false;
    for (double eps : eps_list) {
        auto eu = upper_envelope(value_max, 2 * alpha - 1 - eps);
        auto eg = upper_envelope(grad_max, 2 * alpha - eps);
        bool up = eu.back() > 0.0 ? log_slope(log_delta, eu) >= -kSlopeTolerance : true;
        bool gr = eg.back() > 0.0 ? log_slope(log_delta, eg) >= -kSlopeTolerance : true;
        upper_seen = upper_seen || up;
        grad_seen = grad_seen || gr;
        out.c_upper = eu.back();
        out.c_gradient = eg.back();
        if (up && gr) {
            out.epsilon = eps;
            break;
        }
    }
    if (!upper_seen) out.failures.push_back("upper bound");
    if (!grad_seen) out.failures.push_back("gradient bound");
    out.member = lower_ok && out.epsilon.has_value();
    if (lower_ok && !out.epsilon && upper_seen && grad_seen)
        out.failures.push_back("no single epsilon satisfies both upper bounds");
    return out;
}

MuEstimate mu_estimate(const ScalarField& ell, const BoundaryLayerGrid& g) {
    for (const auto& shell : g.shells)
        for (const auto& x : shell.points)
            if (!(std::fabs(ell(x)) >= 1.0)) {
                std::ostringstream os;
                os << "|l| = " << std::fabs(ell(x)) << " < 1 at delta = " << shell.delta;
                throw RejectedInput(os.str(), x);
            }
    MuEstimate out;
    std::size_t n = std::min<std::size_t>(8, g.shells.size());
    std::vector<double> idx;
    for (std::size_t k = g.shells.size() - n; k < g.shells.size(); ++k) {
        const auto& shell = g.shells[k];
        double q = 0.0;
        for (const auto& x : shell.points)
            q = std::max(q, ell.gradient(x).norm() * shell.delta / std::fabs(ell(x)));
        out.by_shell.push_back(q);
        idx.push_back(static_cast<double>(idx.size()));
        out.mu = std::max(out.mu, q);
    }
    double slope = detail::fit_line(idx, out.by_shell).slope;
    out.increasing = out.mu > 0.0 && slope * (n - 1) > 0.01 * out.mu;
    return out;
}

namespace {

using Spinor = Eigen::Vector2cd;

double bump(const Point& x, double cx, double cy, double radius) {
    double dx = x[0] - cx, dy = x.size() > 1 ? x[1] - cy : 0.0;
    double s2 = (dx * dx + dy * dy) / (radius * radius);
    return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0;
}

Spinor identity_test_spinor(int k, const Point& p) {
    double x = p[0], y = p.size() > 1 ? p[1] : 0.0;
    switch (k) {
        case 0: return Spinor(bump(p, 0.0, 0.0, 0.6), 0.0);
        case 1: {
            double b = bump(p, 0.2, 0.1, 0.4);
            return Spinor(b * std::exp(3.0 * I * x), 0.5 * b);
        }
        case 2: return Spinor(0.0, bump(p, -0.3, 0.2, 0.3) * (1.0 + y));
        case 3: {
            double b = bump(p, 0.1, -0.35, 0.3);
            return Spinor(b * cplx(x, y), I * b);
        }
        default: {
            double b = bump(p, -0.25, -0.25, 0.3);
            return Spinor(b * std::cos(2 * x + y), b * std::sin(x));
        }
    }
}

}  // namespace

int identity_test_function_count() { return 5; }

IdentityResidual weighted_identity_residual(const DiracCoefficients& op, const ScalarField& h,
                                            double zeta, double step) {
    int d = op.dimension();
    if (d > 2) throw std::invalid_argument("the identity check runs in one or two dimensions");
    if (op.spinor_dimension() != 2) throw std::invalid_argument("expected two-component spinors");
    if (!(step > 0.0) || step > 0.1) throw std::invalid_argument("grid step must lie in (0, 0.1]");

    const double half = 0.75;
    int n = static_cast<int>(std::lround(2 * half / step)) + 1;
    double hs = 2 * half / (n - 1);
    int ny = d == 2 ? n : 1;
    auto coord = [&](int i) { return -half + i * hs; };
    auto node = [&](int i, int j) { return d == 2 ? point2(coord(i), coord(j)) : point1(coord(i)); };

    {
        std::vector<Point> samples;
        for (int i = 0; i < n; i += std::max(1, n / 8))
            for (int j = 0; j < ny; j += std::max(1, n / 8)) samples.push_back(node(i, j));
        ScalarCheck sc = is_scalar_potential(op, samples);
        if (!sc.scalar) throw RejectedInput("V is not a scalar potential");
    }

    const auto& a = op.kinetic();
    IdentityResidual out;
    out.step = hs;
    double cell = std::pow(hs, d);
    for (int f = 0; f < identity_test_function_count(); ++f) {
        std::vector<Spinor> phi(static_cast<std::size_t>(n) * ny);
        auto at = [&](int i, int j) -> Spinor {
            if (i < 0 || i >= n || j < 0 || j >= ny) return Spinor::Zero();
            return phi[static_cast<std::size_t>(i) * ny + j];
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < ny; ++j) phi[static_cast<std::size_t>(i) * ny + j] = identity_test_spinor(f, node(i, j));

        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < ny; ++j) {
                Spinor p = at(i, j);
                if (p.isZero(0.0) && at(i + 1, j).isZero(0.0) && at(i - 1, j).isZero(0.0) &&
                    at(i, j + 1).isZero(0.0) && at(i, j - 1).isZero(0.0))
                    continue;
                Point x = node(i, j);
                Spinor d1 = (at(i + 1, j) - at(i - 1, j)) / (2 * hs);
                Spinor kin = -I * (a[0].matrix() * d1);
                if (d == 2) {
                    Spinor d2 = (at(i, j + 1) - at(i, j - 1)) / (2 * hs);
                    kin += -I * (a[1].matrix() * d2);
                }
                CMat s = op.symbol(h.gradient(x));
                CMat v = op.potential(x);
                Spinor pp = kin + I * (s * p);
                Spinor full = pp + v * p + I * zeta * p;
                lhs += full.squaredNorm() * cell;

                CMat pot = v * v + zeta * zeta * CMat::Identity(2, 2) + 2 * zeta * s -
                           I * (s * v - v * s) - 0.5 * I * commutator_sum(op, op.potential_gradient(x));
                rhs += (pp.squaredNorm() + (p.adjoint() * pot * p)(0, 0).real()) * cell;
            }
        out.lhs.push_back(lhs);
        out.rhs.push_back(rhs);
        out.residual = std::max(out.residual, std::fabs(lhs - rhs));
    }
    return out;
}

bool distance_potential_verdict(double mu, double lambda, bool convex_flat) {
    if (mu < 0.0) throw std::invalid_argument("mu must be non-negative");
    if (convex_flat && mu != 0.0) throw std::invalid_argument("the convex flat case has mu = 0");
    return convex_flat ? lambda >= 0.5 : lambda > 0.5 * (1.0 + mu);
}

}  // namespace confine
