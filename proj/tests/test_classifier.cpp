#include "confine/classifier.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace confine;

namespace {

RadialDiracProblem power_problem(double left, double right, double v0 = 0.0, double v3 = 0.0) {
    RadialDiracProblem p;
    p.potential.domain = Interval{0.0, 1.0};
    p.potential.v1 = Coefficient::closed_form(Family::Power, {left, right, 1.0});
    if (v0 != 0.0) p.potential.v0 = Coefficient::closed_form(Family::Power, {v0, v0, 1.0});
    if (v3 != 0.0) p.potential.v3 = Coefficient::closed_form(Family::Power, {v3, v3, 1.0});
    return p;
}

ClassifyOptions numerical() {
    ClassifyOptions o;
    o.force = ForceMethod::Numerical;
    return o;
}

}  // namespace

TEST_CASE("endpoint classes of the power family") {
    auto half = endpoint_class(power_problem(0.0, 0.5), Side::Right);
    CHECK(half.cls == EndpointClass::LimitPoint);
    CHECK(half.method == Method::ClosedFormRule);
    CHECK(std::string(to_string(half.rule)) == "P:M(ii)");

    auto weak = endpoint_class(power_problem(0.0, 0.4), Side::Right);
    CHECK(weak.cls == EndpointClass::LimitCircle);
    CHECK(std::string(to_string(weak.rule)) == "P:M(iii)");

    RadialDiracProblem zero;
    zero.potential.domain = Interval{0.0, 1.0};
    CHECK(endpoint_class(zero, Side::Right).cls == EndpointClass::LimitCircle);
}

TEST_CASE("whole-operator verdicts") {
    auto both = esa_verdict_1d(power_problem(0.6, 0.6));
    CHECK(both.verdict == Verdict::EssentiallySelfAdjoint);
    CHECK(std::string(to_string(both.rule)) == "P:M(ii)");

    RadialDiracProblem electric;
    electric.potential.domain = Interval{0.0, 1.0};
    electric.potential.v0 = Coefficient::constant(2.0);
    auto e = esa_verdict_1d(electric);
    CHECK(e.verdict == Verdict::NotEssentiallySelfAdjoint);
    CHECK(std::string(to_string(e.rule)) == "L:NES");

    auto mixed = esa_verdict_1d(power_problem(0.6, 0.4));
    CHECK(mixed.verdict == Verdict::NotEssentiallySelfAdjoint);
    REQUIRE(mixed.right);
    CHECK(mixed.right->cls == EndpointClass::LimitCircle);
    CHECK(mixed.left->cls == EndpointClass::LimitPoint);
}

TEST_CASE("closed-form thresholds") {
    CHECK(power_family_verdict(0.0, 0.5, 0.0));
    CHECK_FALSE(power_family_verdict(0.0, 0.4, 0.0));
    CHECK(power_family_verdict(0.3, 0.5, 0.3));
    CHECK(em_threshold_verdict(1.0, 0.0, std::sqrt(0.75)) == (std::sqrt(0.75) * std::sqrt(0.75) <= 0.75));
    CHECK(em_threshold_verdict(1.0, 0.0, 0.8));
    CHECK_FALSE(em_threshold_verdict(0.6, 0.0, 0.5));
    for (double ls : {0.0, 0.3, 0.5, 0.7}) CHECK(em_threshold_verdict(0.0, ls, 0.0) == (ls * ls >= 0.25));
    CHECK(power_family_slack(0.0, 0.6, 0.0) == doctest::Approx(0.11));
}

TEST_CASE("Chernoff family is confining iff alpha <= 1") {
    CHECK(chernoff_example_verdict(2.0).verdict.verdict == Verdict::NotEssentiallySelfAdjoint);
    CHECK(chernoff_example_verdict(1.0).verdict.verdict == Verdict::EssentiallySelfAdjoint);
    CHECK(chernoff_example_verdict(0.0).verdict.verdict == Verdict::EssentiallySelfAdjoint);
    CHECK(std::string(to_string(chernoff_example_verdict(0.5).verdict.rule)) == "Comment3");
}

TEST_CASE("numerical solution count agrees with the closed-form rule") {
    for (double lambda : {0.25, 0.4, 0.55, 0.75, 1.0}) {
        CAPTURE(lambda);
        auto p = power_problem(lambda, lambda);
        for (Side s : {Side::Left, Side::Right}) {
            auto rule = endpoint_class(p, s);
            auto num = endpoint_class(p, s, numerical());
            CHECK(num.method == Method::NumericalSolutionCount);
            CHECK(num.cls == rule.cls);
            CHECK(rule.cls == (lambda >= 0.5 ? EndpointClass::LimitPoint : EndpointClass::LimitCircle));
        }
    }
    auto critical = endpoint_class(power_problem(0.5, 0.5), Side::Right, numerical());
    CHECK(critical.cls != EndpointClass::LimitCircle);
}

TEST_CASE("coupled power family follows the mixed threshold numerically") {
    struct Case { double l0, l1, l3; };
    for (Case c : {Case{0.3, 0.6, 0.0}, Case{0.6, 0.6, 0.0}, Case{0.2, 0.4, 0.4}, Case{0.5, 0.3, 0.5}}) {
        CAPTURE(c.l0);
        CAPTURE(c.l1);
        CAPTURE(c.l3);
        auto v = esa_verdict_1d(power_problem(c.l1, c.l1, c.l0, c.l3), numerical());
        bool oracle = c.l0 * c.l0 <= c.l1 * c.l1 + c.l3 * c.l3 - 0.25;
        CHECK(v.verdict == (oracle ? Verdict::EssentiallySelfAdjoint : Verdict::NotEssentiallySelfAdjoint));
    }
}

TEST_CASE("verdicts are monotone in lambda") {
    bool seen_esa = false;
    for (int k = 0; k <= 20; ++k) {
        double lambda = 0.2 + 0.03 * k;
        bool esa = esa_verdict_1d(power_problem(lambda, lambda)).verdict == Verdict::EssentiallySelfAdjoint;
        if (seen_esa) CHECK(esa);
        seen_esa = seen_esa || esa;
    }
    CHECK(seen_esa);
}

TEST_CASE("verdicts ignore a bounded v2") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> lam(0.2, 1.0), amp(-3.0, 3.0), om(0.5, 8.0), ph(0.0, 6.0);
    int mismatches = 0;
    for (int n = 0; n < 100; ++n) {
        auto p = power_problem(lam(rng), lam(rng));
        auto with_v2 = p;
        with_v2.potential.v2 = n % 2 ? Coefficient::constant(amp(rng))
                                     : Coefficient::closed_form(Family::Sine, {amp(rng), om(rng), ph(rng)});
        if (esa_verdict_1d(p).verdict != esa_verdict_1d(with_v2).verdict) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("overall verdict is a function of the two endpoint classes") {
    using EC = EndpointClass;
    CHECK(combine_endpoints(EC::LimitPoint, EC::LimitPoint) == Verdict::EssentiallySelfAdjoint);
    CHECK(combine_endpoints(EC::LimitPoint, EC::LimitCircle) == Verdict::NotEssentiallySelfAdjoint);
    CHECK(combine_endpoints(EC::LimitCircle, EC::LimitPoint) == Verdict::NotEssentiallySelfAdjoint);
    CHECK(combine_endpoints(EC::LimitPoint, EC::Inconclusive) == Verdict::Inconclusive);
    CHECK(combine_endpoints(EC::Inconclusive, EC::Inconclusive) == Verdict::Inconclusive);
}
