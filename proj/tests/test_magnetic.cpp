#include "confine/magnetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace confine;

namespace {

PartialWaveOptions single_thread() {
    PartialWaveOptions o;
    o.threads = 1;
    return o;
}

}  // namespace

TEST_CASE("transversal gauge of catalog fields") {
    auto constant = transversal_gauge(MagneticField2D::constant(3.0));
    for (double r : {0.1, 0.5, 0.9}) CHECK(constant(r) == doctest::Approx(1.5 * r));
    auto zero = transversal_gauge(MagneticField2D::constant(0.0));
    CHECK(zero(0.7) == 0.0);
    auto pcm = transversal_gauge(MagneticField2D::critical_family(1.0));
    CHECK(pcm(0.5) == doctest::Approx(2.0 * (1.0 - std::log(2.0))).epsilon(1e-12));
    CHECK(pcm(0.0) == 0.0);
}

TEST_CASE("gauge round trip reproduces the field") {
    std::vector<MagneticField2D> fields = {
        MagneticField2D::constant(2.0), MagneticField2D::critical_family(0.75),
        MagneticField2D::boundary_power(0.8),
        MagneticField2D::tabulated({0.0, 0.3, 0.6, 0.9, 0.9995}, {1.0, 1.5, 0.5, 2.0, 2.0})};
    for (const auto& b : fields) {
        CAPTURE(b.describe());
        auto back = field_from_gauge(transversal_gauge(b));
        double worst = 0.0;
        for (int k = 1; k <= 999; ++k) {
            double r = 0.001 * k;
            worst = std::max(worst, std::abs(back(r) - b(r)) / std::max(1.0, std::abs(b(r))));
        }
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("fiber operators") {
    auto zero = transversal_gauge(MagneticField2D::constant(0.0));
    auto p = fiber_problem(zero, -1);
    CHECK(p.w(0.25) == doctest::Approx(2.0));  // 1 / (2 r)
    CHECK(half_integer_momentum(0) == 0.5);
    CHECK(half_integer_momentum(-1) == -0.5);
    auto free = free_plane_fiber(0);  // m = -1/2
    CHECK(free.w(0.5) == doctest::Approx(1.0));
    CHECK(std::isinf(free.domain().b));
    CHECK(esa_verdict_1d(free).verdict == Verdict::EssentiallySelfAdjoint);
}

TEST_CASE("partial-wave verdicts") {
    auto low = partial_wave_verdict(MagneticField2D::critical_family(0.25), single_thread());
    CHECK(low.aggregate == Verdict::NotEssentiallySelfAdjoint);
    REQUIRE(low.failing_fiber);
    CHECK(*low.failing_fiber == -1);
    CHECK(low.rows.size() == 32u);
    CHECK(low.rows.front().j == -16);
    CHECK(low.rows.back().j == 15);

    auto high = partial_wave_verdict(MagneticField2D::critical_family(0.75), single_thread());
    CHECK(high.aggregate == Verdict::EssentiallySelfAdjoint);
    CHECK(high.boundary_classes_uniform);

    auto none = partial_wave_verdict(MagneticField2D::constant(0.0), single_thread());
    CHECK(none.aggregate == Verdict::NotEssentiallySelfAdjoint);
}

TEST_CASE("fiber symmetry for a vanishing gauge") {
    auto zero = transversal_gauge(MagneticField2D::constant(0.0));
    for (int j = -4; j <= 3; ++j) {
        CAPTURE(j);
        auto a = esa_verdict_1d(fiber_problem(zero, j));
        auto b = esa_verdict_1d(fiber_problem(zero, -1 - j));
        CHECK(a.verdict == b.verdict);
        CHECK(a.left->cls == b.left->cls);
    }
}

TEST_CASE("boundary field certificate") {
    CHECK(boundary_field_certificate(MagneticField2D::critical_family(0.5), 0.1).holds);
    auto below = boundary_field_certificate(MagneticField2D::critical_family(0.49), 0.1);
    CHECK_FALSE(below.holds);
    CHECK(below.failure_r.has_value());
    CHECK_FALSE(boundary_field_certificate(MagneticField2D::constant(10.0), 0.1).holds);
}

TEST_CASE("certificate and partial waves agree on the critical family") {
    for (double alpha : {0.25, 0.4, 0.5, 0.75, 1.0}) {
        CAPTURE(alpha);
        auto b = MagneticField2D::critical_family(alpha);
        bool cert = boundary_field_certificate(b, 0.1).holds;
        CHECK(cert == (alpha >= 0.5));
        auto t = partial_wave_verdict(b, single_thread());
        if (alpha == 0.5 && t.aggregate == Verdict::Inconclusive) continue;
        CHECK(t.aggregate == (cert ? Verdict::EssentiallySelfAdjoint : Verdict::NotEssentiallySelfAdjoint));
    }
}

TEST_CASE("bisection on fiber j = -1 finds the critical strength") {
    auto b = critical_strength_bisection([](double s) { return MagneticField2D::critical_family(s); }, -1,
                                         0.25, 0.75, 5e-3);
    CHECK(std::abs(b.estimate() - 0.5) <= 0.02);
    CHECK(b.hi - b.lo <= 5e-3);
}

TEST_CASE("supersymmetric factorisation residuals") {
    auto flat = transversal_gauge(MagneticField2D::constant(0.0));
    auto coarse = susy_factorization_residual(flat, 0.02);
    auto fine = susy_factorization_residual(flat, 0.01);
    // no field: both factorisations hold up to roundoff on any grid
    for (const auto& r : {coarse, fine}) {
        CHECK(r.plus < 1e-12);
        CHECK(r.minus < 1e-12);
    }

    auto unit = transversal_gauge(MagneticField2D::constant(1.0));
    auto r1 = susy_factorization_residual(unit, 0.02);
    auto r2 = susy_factorization_residual(unit, 0.01);
    auto r3 = susy_factorization_residual(unit, 0.005);
    for (auto [a, b] : {std::pair{r1.plus, r2.plus}, std::pair{r2.plus, r3.plus}, std::pair{r1.minus, r2.minus},
                        std::pair{r2.minus, r3.minus}}) {
        CHECK(a / b >= 3.5);
        CHECK(a / b <= 4.5);
    }
    CHECK(r1.plus_by_function.size() == static_cast<std::size_t>(test_function_count()));
}

TEST_CASE("diamagnetic inequality on the test functions") {
    for (double b0 : {1.0, 5.0}) {
        auto d = diamagnetic_check(transversal_gauge(MagneticField2D::constant(b0)), 0.01);
        CHECK(d.holds);
        for (std::size_t i = 0; i < d.field_term.size(); ++i) CHECK(d.field_term[i] <= d.kinetic_term[i]);
    }
    auto pcm = diamagnetic_check(transversal_gauge(MagneticField2D::critical_family(0.75)), 0.01);
    CHECK(pcm.holds);
}

TEST_CASE("cylinder fibers do not depend on the constant mass") {
    auto g = transversal_gauge(MagneticField2D::critical_family(0.75));
    for (int j : {-2, -1, 0, 1}) {
        CAPTURE(j);
        auto base = fiber_problem(g, j);
        auto xi0 = cylinder_fiber(g, j, 0.0);
        CHECK(xi0.w(0.3) == doctest::Approx(base.w(0.3)));
        auto v0 = esa_verdict_1d(xi0).verdict;
        CHECK(esa_verdict_1d(cylinder_fiber(g, j, 5.0)).verdict == v0);
        CHECK(esa_verdict_1d(cylinder_fiber(g, j, -5.0)).verdict == v0);
    }
}
