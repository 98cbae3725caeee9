#include "confine/radial.hpp"

#include "dopri.hpp"
#include "linefit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace confine {

namespace {

const cplx I(0.0, 1.0);

// Chart t = -ln(distance) toward one endpoint.
struct Chart {
    Interval iv;
    Side side;
    bool infinite;

    double distance_of(double x) const {
        if (infinite) return std::atan(1.0 / (x - iv.a));
        return iv.distance_to(side, x);
    }
    double x_of(double dist) const {
        if (infinite) return iv.a + 1.0 / std::tan(dist);
        return side == Side::Left ? iv.a + dist : iv.b - dist;
    }
    // dx/dt
    double dxdt(double dist) const {
        if (infinite) {
            double s = std::sin(dist);
            return dist / (s * s);
        }
        return side == Side::Left ? -dist : dist;
    }
    double log_jacobian(double dist) const {
        if (infinite) return -2.0 * std::log(std::sin(dist));
        return 0.0;
    }
};

Chart make_chart(const RadialDiracProblem& p, Side s) {
    return Chart{p.domain(), s, s == Side::Right && p.domain().infinite_right()};
}

double end_distance(const Chart& c, const SolverOptions& opt) {
    if (c.infinite) return std::atan(1.0 / opt.infinity_reach);
    return opt.delta_min * c.iv.length();
}

void check_finite(const Eigen::Matrix2cd& m, double x) {
    for (int i = 0; i < 4; ++i)
        if (!std::isfinite(m(i).real()) || !std::isfinite(m(i).imag()))
            throw std::domain_error("coefficient evaluation failed at x = " + std::to_string(x));
}

constexpr long kStepBudget = 400000;

}  // namespace

double RadialDiracProblem::w(double x) const {
    double v = potential.v1.value(x, potential.domain);
    if (magnetic) v += magnetic->value(x, potential.domain);
    if (angular) v -= *angular / x;
    return v;
}

EndpointAsymptotics RadialDiracProblem::w_asymptotics(Side s) const {
    EndpointAsymptotics e = potential.v1.asymptotics(s, potential.domain);
    if (magnetic) e = e + magnetic->asymptotics(s, potential.domain);
    if (angular && *angular != 0.0) {
        EndpointAsymptotics a;
        if (s == Side::Left)
            a.inverse_distance = -*angular;
        else
            a.remainder = Remainder::Bounded;
        e = e + a;
    }
    return e;
}

bool RadialDiracProblem::w_is_zero() const {
    return potential.v1.is_zero() && (!magnetic || magnetic->is_zero()) &&
           (!angular || *angular == 0.0);
}

cplx RadialDiracProblem::resolve_shift(Side s) const {
    if (spectral_shift) return *spectral_shift;
    if (s == Side::Right && domain().infinite_right()) return I;
    return potential.v0.is_zero() ? cplx(0.0) : I;
}

Eigen::Matrix2cd RadialDiracProblem::system_matrix(double x, cplx zeta) const {
    const Interval& iv = potential.domain;
    double wv = w(x);
    double v0 = potential.v0.value(x, iv);
    double v3 = potential.v3.value(x, iv);
    Eigen::Matrix2cd a;
    a << -wv, -(v0 - v3 - zeta), v0 + v3 - zeta, wv;
    return a;
}

void RadialDiracProblem::validate() const {
    potential.validate();
    if (!potential.v2.is_zero())
        throw std::invalid_argument("radial problem must be gauge-normalised (v2 = 0)");
    if (angular && potential.domain.a != 0.0)
        throw std::invalid_argument("angular term m/r needs the interval to start at r = 0");
}

LogAmplitudeTrajectory integrate_to_endpoint(const RadialDiracProblem& p, double x0,
                                             const Eigen::Vector2cd& psi0, Side endpoint,
                                             const SolverOptions& opt) {
    p.validate();
    if (!p.domain().contains(x0)) throw std::invalid_argument("x0 must be strictly interior");
    double n0 = psi0.norm();
    if (!(n0 > 0.0) || !std::isfinite(n0)) throw std::invalid_argument("psi0 must be nonzero");

    Chart chart = make_chart(p, endpoint);
    cplx zeta = p.resolve_shift(endpoint);
    double t = -std::log(chart.distance_of(x0));
    double t_end = -std::log(end_distance(chart, opt));
    if (!(t_end > t)) throw std::invalid_argument("x0 is already inside the endpoint cutoff");

    LogAmplitudeTrajectory out;
    out.endpoint = endpoint;
    auto record = [&](double tt, double rho, const Eigen::Vector2cd& u) {
        double dist = std::exp(-tt);
        out.x.push_back(chart.x_of(dist));
        out.distance.push_back(dist);
        out.log_jacobian.push_back(chart.log_jacobian(dist));
        out.rho.push_back(rho);
        out.u.push_back(u);
    };

    auto rhs = [&](double tt, const Eigen::VectorXd& y) {
        double dist = std::exp(-tt);
        double x = chart.x_of(dist);
        Eigen::Matrix2cd m = chart.dxdt(dist) * p.system_matrix(x, zeta);
        check_finite(m, x);
        Eigen::Vector2cd u(cplx(y[1], y[2]), cplx(y[3], y[4]));
        Eigen::Vector2cd mu = m * u;
        double growth = u.dot(mu).real();  // u^* M u
        Eigen::Vector2cd du = mu - growth * u;
        Eigen::VectorXd dy(5);
        dy << growth, du[0].real(), du[0].imag(), du[1].real(), du[1].imag();
        return dy;
    };

    Eigen::Vector2cd u = psi0 / n0;
    double rho = std::log(n0);
    record(t, rho, u);
    Eigen::VectorXd y(5);
    y << rho, u[0].real(), u[0].imag(), u[1].real(), u[1].imag();

    double h = std::min(opt.max_log_step, 0.01);
    long steps = 0;
    while (t < t_end) {
        if (++steps > kStepBudget) {
            out.note = "step budget exhausted";
            return out;
        }
        h = std::min({h, opt.max_log_step, t_end - t});
        auto r = detail::dopri_step(rhs, t, y, h, opt.rtol, opt.atol);
        if (r.error <= 1.0) {
            t += h;
            y = r.y;
            Eigen::Vector2cd uu(cplx(y[1], y[2]), cplx(y[3], y[4]));
            double nu = uu.norm();
            y[0] += std::log(nu);
            uu /= nu;
            y[1] = uu[0].real();
            y[2] = uu[0].imag();
            y[3] = uu[1].real();
            y[4] = uu[1].imag();
            record(t, y[0], uu);
        }
        h = detail::next_step(h, r.error);
        if (h < 1e-13) {
            out.note = "step size underflow";
            return out;
        }
    }
    out.complete = true;
    return out;
}

const char* to_string(TailVerdict v) {
    switch (v) {
        case TailVerdict::SquareIntegrable: return "SquareIntegrable";
        case TailVerdict::NotSquareIntegrable: return "NotSquareIntegrable";
        case TailVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

TailClass tail_l2_class(const LogAmplitudeTrajectory& t, const SolverOptions& opt) {
    TailClass c;
    if (!t.complete || t.size() == 0) {
        c.note = "trajectory did not reach the endpoint cutoff";
        return c;
    }
    double dmin = t.distance.back();
    double limit = dmin * std::pow(10.0, opt.fit_decades);
    double split = dmin * std::pow(10.0, 0.5 * opt.fit_decades);
    std::vector<double> xs, ys, xi, yi, xo, yo;
    double dmax = dmin;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t.distance[i] > limit * (1 + 1e-12)) continue;
        double x = std::log(t.distance[i]);
        double y = 2.0 * t.rho[i] + t.log_jacobian[i];
        xs.push_back(x);
        ys.push_back(y);
        (t.distance[i] <= split ? xi : xo).push_back(x);
        (t.distance[i] <= split ? yi : yo).push_back(y);
        dmax = std::max(dmax, t.distance[i]);
    }
    c.samples = static_cast<int>(xs.size());
    c.decades = std::log10(dmax / dmin);
    if (c.samples < opt.min_fit_samples) {
        c.note = "fewer than " + std::to_string(opt.min_fit_samples) + " samples in fit window";
        return c;
    }
    detail::LineFit all = detail::fit_line(xs, ys);
    double p = all.slope;
    c.exponent = p;
    c.ci_low = p - 2 * all.stderr_slope;
    c.ci_high = p + 2 * all.stderr_slope;
    c.near_critical = std::fabs(p + 1.0) < 0.1;
    if (!std::isfinite(p)) {
        c.note = "non-finite fit";
        return c;
    }
    detail::LineFit inner = detail::fit_line(xi, yi), outer = detail::fit_line(xo, yo);
    c.drift = (inner.n >= 3 && outer.n >= 3) ? std::fabs(inner.slope - outer.slope) : opt.margin;
    if (!std::isfinite(c.drift)) c.drift = opt.margin;
    c.effective_margin =
        std::clamp(5.0 * c.drift + 2.0 * all.stderr_slope, opt.min_margin, opt.margin);
    if (p > -1.0 + c.effective_margin)
        c.verdict = TailVerdict::SquareIntegrable;
    else if (p <= -1.0 - c.effective_margin)
        c.verdict = TailVerdict::NotSquareIntegrable;
    else
        c.note = "exponent inside the critical margin";
    return c;
}

L2Count count_l2_solutions(const RadialDiracProblem& p, Side endpoint, const SolverOptions& opt) {
    p.validate();
    Chart chart = make_chart(p, endpoint);
    L2Count out;
    out.zeta = p.resolve_shift(endpoint);
    const Interval& iv = p.domain();
    double x0 = iv.infinite_right() ? iv.a + 1.0 : 0.5 * (iv.a + iv.b);
    double t = -std::log(chart.distance_of(x0));
    double t_end = -std::log(end_distance(chart, opt));

    auto rhs = [&](double tt, const Eigen::VectorXd& y) {
        double dist = std::exp(-tt);
        double x = chart.x_of(dist);
        Eigen::Matrix2cd m = chart.dxdt(dist) * p.system_matrix(x, out.zeta);
        check_finite(m, x);
        Eigen::Matrix2cd q;
        q << cplx(y[0], y[1]), cplx(y[4], y[5]), cplx(y[2], y[3]), cplx(y[6], y[7]);
        Eigen::Matrix2cd dq = m * q;
        Eigen::VectorXd dy(8);
        dy << dq(0, 0).real(), dq(0, 0).imag(), dq(1, 0).real(), dq(1, 0).imag(), dq(0, 1).real(),
            dq(0, 1).imag(), dq(1, 1).real(), dq(1, 1).imag();
        return dy;
    };
    auto unpack = [](const Eigen::VectorXd& y) {
        Eigen::Matrix2cd q;
        q << cplx(y[0], y[1]), cplx(y[4], y[5]), cplx(y[2], y[3]), cplx(y[6], y[7]);
        return q;
    };
    auto pack = [](const Eigen::Matrix2cd& q) {
        Eigen::VectorXd y(8);
        y << q(0, 0).real(), q(0, 0).imag(), q(1, 0).real(), q(1, 0).imag(), q(0, 1).real(),
            q(0, 1).imag(), q(1, 1).real(), q(1, 1).imag();
        return y;
    };

    double logs[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k) out.trajectories[k].endpoint = endpoint;
    auto record = [&](double tt, const Eigen::Matrix2cd& q) {
        double dist = std::exp(-tt);
        for (int k = 0; k < 2; ++k) {
            auto& tr = out.trajectories[k];
            tr.x.push_back(chart.x_of(dist));
            tr.distance.push_back(dist);
            tr.log_jacobian.push_back(chart.log_jacobian(dist));
            tr.rho.push_back(logs[k]);
            tr.u.push_back(q.col(k));
        }
    };
    // Gram-Schmidt, applied twice.
    auto orthonormalise = [&](Eigen::Matrix2cd& q) {
        for (int pass = 0; pass < 2; ++pass) {
            double r11 = q.col(0).norm();
            q.col(0) /= r11;
            cplx r12 = q.col(0).dot(q.col(1));
            q.col(1) -= r12 * q.col(0);
            double r22 = q.col(1).norm();
            q.col(1) /= r22;
            logs[0] += std::log(r11);
            logs[1] += std::log(r22);
        }
        double defect = std::abs(q.col(0).dot(q.col(1)));
        defect = std::max(defect, std::fabs(q.col(0).norm() - 1.0));
        defect = std::max(defect, std::fabs(q.col(1).norm() - 1.0));
        out.max_orthogonality_defect = std::max(out.max_orthogonality_defect, defect);
    };

    Eigen::Matrix2cd q = Eigen::Matrix2cd::Identity();
    record(t, q);
    Eigen::VectorXd y = pack(q);
    double h = 0.01;
    long steps = 0;
    bool complete = true;
    const double chunk = 0.1;
    while (t < t_end && complete) {
        double t_next = std::min(t + chunk, t_end);
        while (t < t_next) {
            if (++steps > kStepBudget) {
                complete = false;
                break;
            }
            h = std::min({h, opt.max_log_step, t_next - t});
            auto r = detail::dopri_step(rhs, t, y, h, opt.rtol, opt.atol);
            if (r.error <= 1.0) {
                t = (t_next - (t + h) < 1e-14) ? t_next : t + h;
                y = r.y;
                if (y.cwiseAbs().maxCoeff() > 1e50) {
                    Eigen::Matrix2cd qq = unpack(y);
                    orthonormalise(qq);
                    y = pack(qq);
                }
            }
            h = detail::next_step(h, r.error);
            if (h < 1e-13) {
                complete = false;
                break;
            }
        }
        if (!complete) break;
        q = unpack(y);
        orthonormalise(q);
        y = pack(q);
        record(t, q);
    }
    for (int k = 0; k < 2; ++k) {
        out.trajectories[k].complete = complete;
        if (!complete) out.trajectories[k].note = "integration stopped before the cutoff";
        out.tails[k] = tail_l2_class(out.trajectories[k], opt);
    }
    // Column order follows the initial frame, which can start on an exact
    // decaying solution; report the faster-growing tail first.
    if (out.tails[1].exponent < out.tails[0].exponent) {
        std::swap(out.tails[0], out.tails[1]);
        std::swap(out.trajectories[0], out.trajectories[1]);
    }
    int not_l2 = 0;
    for (const auto& tc : out.tails) {
        if (tc.verdict == TailVerdict::Inconclusive) out.inconclusive = true;
        if (tc.verdict == TailVerdict::NotSquareIntegrable) ++not_l2;
    }
    out.count = 2 - not_l2;
    return out;
}

}  // namespace confine
