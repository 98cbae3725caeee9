#include "confine/classifier.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace confine {

namespace {

using boost::multiprecision::cpp_rational;

// G(d) = integral of f over [d, d0], cached on the dyadic knots d0 * 2^-k.
class TailAntiderivative {
public:
    TailAntiderivative(std::function<double(double)> f, double d0) : f_(std::move(f)), d0_(d0) {
        knots_.push_back(0.0);
    }

    double operator()(double d) {
        if (d >= d0_) return 0.0;
        int k = static_cast<int>(std::ceil(std::log2(d0_ / d)));
        if (k < 1) k = 1;
        while (d0_ * std::ldexp(1.0, -(k - 1)) <= d) --k;  // guard rounding
        while (static_cast<int>(knots_.size()) < k) {
            int j = static_cast<int>(knots_.size());
            double lo = d0_ * std::ldexp(1.0, -j), hi = d0_ * std::ldexp(1.0, -(j - 1));
            knots_.push_back(knots_.back() + integrate(f_, lo, hi, 1e-12));
        }
        double upper = d0_ * std::ldexp(1.0, -(k - 1));
        // [d, upper] lies inside one dyadic shell, where a fixed rule is accurate.
        return knots_[k - 1] + boost::math::quadrature::gauss<double, 30>::integrate(f_, d, upper);
    }

private:
    std::function<double(double)> f_;
    double d0_;
    std::vector<double> knots_;  // knots_[k] = G(d0 * 2^-k)
};

EndpointClassification numerical(const RadialDiracProblem& p, Side s, const ClassifyOptions& opt) {
    EndpointClassification c;
    c.endpoint = s;
    c.method = Method::NumericalSolutionCount;
    c.rule = Rule::Numeric;
    L2Count n = count_l2_solutions(p, s, opt.solver);
    c.margin = -1.0 - n.tails[0].exponent;
    c.near_threshold = n.tails[0].near_critical || n.tails[1].near_critical;
    if (n.inconclusive) {
        c.cls = EndpointClass::Inconclusive;
        c.note = "solution tails: " + std::string(to_string(n.tails[0].verdict)) + " / " +
                 to_string(n.tails[1].verdict);
        if (c.near_threshold) c.note += "; borderline exponent near -1";
    } else {
        c.cls = n.count <= 1 ? EndpointClass::LimitPoint : EndpointClass::LimitCircle;
    }
    c.count = std::move(n);
    return c;
}

}  // namespace

const char* to_string(Rule r) {
    switch (r) {
        case Rule::WeylAlternative: return "T:W";
        case Rule::IntegralCriterion: return "P:M(i)";
        case Rule::StrongMass: return "P:M(ii)";
        case Rule::WeakMass: return "P:M(iii)";
        case Rule::PowerThreshold: return "C:SMF";
        case Rule::NoMass: return "L:NES";
        case Rule::BoundaryField: return "T:M2";
        case Rule::CriticalField: return "P:CM";
        case Rule::PartialWaves: return "L:PW";
        case Rule::ScalarCertificate: return "T:S";
        case Rule::HardyCertificate: return "T:SH";
        case Rule::PerturbationWust: return "T:P(i)";
        case Rule::PerturbationKato: return "T:P(ii)";
        case Rule::DistancePotential: return "T:D1S(i)";
        case Rule::DistancePotentialFlat: return "T:D1S(ii)";
        case Rule::MixedThreshold: return "CO.5";
        case Rule::ChernoffFamily: return "Comment3";
        case Rule::Numeric: return "Numeric";
    }
    return "?";
}

const char* to_string(EndpointClass c) {
    switch (c) {
        case EndpointClass::LimitPoint: return "LimitPoint";
        case EndpointClass::LimitCircle: return "LimitCircle";
        case EndpointClass::Inconclusive: return "Inconclusive";
    }
    return "?";
}

const char* to_string(Method m) {
    switch (m) {
        case Method::ClosedFormRule: return "ClosedFormRule";
        case Method::IntegralCriterion: return "IntegralCriterion";
        case Method::NumericalSolutionCount: return "NumericalSolutionCount";
    }
    return "?";
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::EssentiallySelfAdjoint: return "EssentiallySelfAdjoint";
        case Verdict::NotEssentiallySelfAdjoint: return "NotEssentiallySelfAdjoint";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

const char* short_name(Verdict v) {
    switch (v) {
        case Verdict::EssentiallySelfAdjoint: return "ESA";
        case Verdict::NotEssentiallySelfAdjoint: return "NotESA";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

bool power_family_verdict(double lambda0, double lambda1, double lambda3) {
    cpp_rational l0(lambda0), l1(lambda1), l3(lambda3);
    return l0 * l0 + cpp_rational(1, 4) <= l1 * l1 + l3 * l3;
}

bool em_threshold_verdict(double lambda_m, double lambda_s, double lambda_e) {
    return power_family_verdict(lambda_e, lambda_m, lambda_s);
}

double power_family_slack(double lambda0, double lambda1, double lambda3) {
    return lambda1 * lambda1 + lambda3 * lambda3 - 0.25 - lambda0 * lambda0;
}

EndpointClassification endpoint_class(const RadialDiracProblem& p, Side s,
                                      const ClassifyOptions& opt) {
    p.validate();
    const Interval& iv = p.domain();
    bool infinite = s == Side::Right && iv.infinite_right();
    bool z0 = p.potential.v0.is_zero(), z3 = p.potential.v3.is_zero(), z1 = p.w_is_zero();

    if (opt.force == ForceMethod::Numerical || infinite) return numerical(p, s, opt);

    EndpointClassification c;
    c.endpoint = s;
    c.method = Method::ClosedFormRule;
    EndpointAsymptotics e1 = p.w_asymptotics(s);
    EndpointAsymptotics e0 = p.potential.v0.asymptotics(s, iv);
    EndpointAsymptotics e3 = p.potential.v3.asymptotics(s, iv);
    c.asymptotics = e1;

    if (z1 && z3) {
        // psi = exp(-i integral (v0 - zeta)) spinors: unit modulus up to a bounded factor
        c.cls = EndpointClass::LimitCircle;
        c.rule = Rule::NoMass;
        c.margin = -0.25;
        c.note = "no sigma_1/sigma_3 coupling: every solution is square integrable";
        return c;
    }
    if (z0 && z3 && e1.remainder != Remainder::Unknown) {
        if (e1.has_strong_term()) {
            c.cls = EndpointClass::LimitPoint;
            c.rule = Rule::StrongMass;
            c.margin = std::numeric_limits<double>::infinity();
            c.note = "|v1| grows faster than 1/delta";
            return c;
        }
        double lam = e1.inverse_distance;
        c.margin = std::fabs(lam) - 0.5;
        if (std::fabs(lam) >= 0.5) {
            c.cls = EndpointClass::LimitPoint;
            c.rule = Rule::StrongMass;
        } else {
            c.cls = EndpointClass::LimitCircle;
            c.rule = Rule::WeakMass;
        }
        return c;
    }
    auto tame = [](const EndpointAsymptotics& e) {
        return !e.has_strong_term() && e.remainder <= Remainder::Bounded;
    };
    if (tame(e0) && tame(e1) && tame(e3)) {
        double l0 = e0.inverse_distance, l1 = e1.inverse_distance, l3 = e3.inverse_distance;
        c.rule = Rule::PowerThreshold;
        c.margin = power_family_slack(l0, l1, l3);
        c.cls = power_family_verdict(l0, l1, l3) ? EndpointClass::LimitPoint
                                                  : EndpointClass::LimitCircle;
        return c;
    }

    if (z0 && z3) {
        double d0 = 0.25 * iv.length();
        auto wdist = [&p, &iv, s](double d) { return p.w(s == Side::Left ? iv.a + d : iv.b - d); };
        TailAntiderivative g(wdist, d0);
        auto f = [&g](double d) {
            double e = 2.0 * std::fabs(g(d));
            return e > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(e);
        };
        IntegralTest it = improper_integral_diverges(f, d0);
        c.asymptotics = e1;
        if (it.kind != IntegralKind::Inconclusive) {
            c.method = Method::IntegralCriterion;
            c.rule = Rule::IntegralCriterion;
            c.cls = it.kind == IntegralKind::Divergent ? EndpointClass::LimitPoint
                                                       : EndpointClass::LimitCircle;
            c.integral = std::move(it);
            return c;
        }
        EndpointClassification n = numerical(p, s, opt);
        n.integral = std::move(it);
        n.note = "integral criterion inconclusive; " + n.note;
        return n;
    }
    return numerical(p, s, opt);
}

Verdict combine_endpoints(EndpointClass left, EndpointClass right) {
    if (left == EndpointClass::LimitCircle || right == EndpointClass::LimitCircle)
        return Verdict::NotEssentiallySelfAdjoint;
    if (left == EndpointClass::LimitPoint && right == EndpointClass::LimitPoint)
        return Verdict::EssentiallySelfAdjoint;
    return Verdict::Inconclusive;
}

EsaVerdict combine_classifications(EndpointClassification left, EndpointClassification right) {
    EsaVerdict v;
    v.verdict = combine_endpoints(left.cls, right.cls);
    switch (v.verdict) {
        case Verdict::NotEssentiallySelfAdjoint:
            v.rule = right.cls == EndpointClass::LimitCircle ? right.rule : left.rule;
            break;
        case Verdict::EssentiallySelfAdjoint:
            v.rule = left.rule == right.rule ? left.rule : Rule::WeylAlternative;
            break;
        case Verdict::Inconclusive:
            v.rule = Rule::Numeric;
            v.note = "at least one endpoint could not be classified";
            if (left.near_threshold || right.near_threshold)
                v.note += "; fitted exponent is borderline (within 0.1 of the critical -1)";
            break;
    }
    v.left = std::move(left);
    v.right = std::move(right);
    return v;
}

EsaVerdict esa_verdict_1d(const RadialDiracProblem& p0, const ClassifyOptions& opt) {
    RadialDiracProblem p = p0;
    if (!p.potential.v2.is_zero()) p.potential = gauge_remove_v2(p.potential).potential;
    p.validate();

    EsaVerdict v = combine_classifications(endpoint_class(p, Side::Left, opt),
                                           endpoint_class(p, Side::Right, opt));
    bool no_mass = p.w_is_zero() && p.potential.v3.is_zero() && !p.domain().infinite_right();
    if (v.verdict == Verdict::NotEssentiallySelfAdjoint && no_mass && opt.force == ForceMethod::Auto)
        v.rule = Rule::NoMass;
    return v;
}

ChernoffVerdict chernoff_example_verdict(double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    ChernoffVerdict out;
    const double half_pi = 0.5 * kPi;
    // With x = tan(theta) and e = distance of theta to +-pi/2:
    //   F = integral_0^x dy / a_alpha = +-G(e),  G(e) = integral_e^{pi/2} sin^(alpha-2)
    //   |Psi_+-|^2 dx = sin(e)^(alpha-2) exp(+-F) de
    for (int end = 0; end < 2; ++end) {
        for (int sign = 0; sign < 2; ++sign) {
            TailAntiderivative G([alpha](double u) { return std::pow(std::sin(u), alpha - 2.0); },
                                 half_pi);
            // at +infinity F = G, at -infinity F = -G
            double sF = (sign == 0 ? 1.0 : -1.0) * (end == 0 ? 1.0 : -1.0);
            auto f = [&G, alpha, sF](double e) {
                double lg = (alpha - 2.0) * std::log(std::sin(e)) + sF * G(e);
                return lg > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(lg);
            };
            out.tails[sign][end] = improper_integral_diverges(f, half_pi);
        }
    }
    bool inconclusive = false;
    for (int sign = 0; sign < 2; ++sign) {
        const auto& t = out.tails[sign];
        bool l2 = t[0].kind == IntegralKind::Convergent && t[1].kind == IntegralKind::Convergent;
        bool not_l2 = t[0].kind == IntegralKind::Divergent || t[1].kind == IntegralKind::Divergent;
        out.square_integrable[sign] = l2;
        if (!l2 && !not_l2) inconclusive = true;
    }
    EsaVerdict& v = out.verdict;
    v.rule = Rule::ChernoffFamily;
    if (out.square_integrable[0] || out.square_integrable[1])
        v.verdict = Verdict::NotEssentiallySelfAdjoint;
    else if (inconclusive)
        v.verdict = Verdict::Inconclusive;
    else
        v.verdict = Verdict::EssentiallySelfAdjoint;
    v.note = std::string("Psi_+ ") + (out.square_integrable[0] ? "in" : "not in") + " L2, Psi_- " +
             (out.square_integrable[1] ? "in" : "not in") + " L2";
    return out;
}

}  // namespace confine
