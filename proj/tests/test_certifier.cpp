#include "confine/certifier.hpp"

#include <doctest.h>

#include <cmath>

using namespace confine;

namespace {

DiracCoefficients scalar_op(const DiracCoefficients& free_op, const Domain& d, double lambda, double alpha = 1.0) {
    return free_op.with_potential({{free_op.scalar_structure(), distance_power(d, lambda, alpha)}});
}

// (lambda^2 - lambda - 3/4) / delta^2, the smallest eigenvalue of the Hardy-variant
// matrix for lambda S / delta with H_h = 1 / (4 delta^2).
double hardy_min_scaled(double lambda) { return lambda * lambda - std::abs(lambda) - 0.75; }

}  // namespace

TEST_CASE("boundary layer grid invariants") {
    for (const Domain& d : {Domain::interval(0.0, 1.0), Domain::unit_disk(), Domain::unit_ball(3),
                            Domain::annulus(0.5), Domain::half_line(0.0)}) {
        CAPTURE(d.describe());
        auto g = BoundaryLayerGrid::make(d, 1e-6, 0.1);
        REQUIRE(g.shells.size() == 64u);
        for (std::size_t k = 0; k + 1 < g.shells.size(); ++k) CHECK(g.shells[k].delta > g.shells[k + 1].delta);
        for (const auto& s : g.shells)
            for (const auto& p : s.points) {
                CHECK(d.contains(p));
                CHECK(d.distance(p) == doctest::Approx(s.delta).epsilon(1e-9));
            }
    }
    CHECK(BoundaryLayerGrid::make(Domain::interval(0.0, 1.0)).shells.front().points.size() == 2u);
    CHECK(BoundaryLayerGrid::make(Domain::unit_disk()).shells.front().points.size() == 32u);
    CHECK_THROWS(BoundaryLayerGrid::make(Domain::interval(0.0, 1.0), 0.2, 0.1));
}

TEST_CASE("scalar certificate examples") {
    Domain ball = Domain::unit_ball(3);
    auto g = BoundaryLayerGrid::make(ball);
    auto d3 = DiracCoefficients::dirac_3d();

    auto strong = scalar_certificate(scalar_op(d3, ball, 1.0, 2.0), g);
    CHECK(strong.outcome == CertificateOutcome::Certified);
    CHECK(strong.constant >= kCertificateFloor);

    auto weak = scalar_certificate(scalar_op(d3, ball, 0.1), g);
    CHECK(weak.outcome == CertificateOutcome::Falsified);
    CHECK(weak.witness.has_value());
    CHECK(weak.min_eigenvalue < 0.0);

    auto none = scalar_certificate(d3, g);
    CHECK(none.outcome == CertificateOutcome::Falsified);
}

TEST_CASE("certificates refuse non-scalar potentials") {
    Domain ball = Domain::unit_ball(3);
    auto g = BoundaryLayerGrid::make(ball);
    auto d3 = DiracCoefficients::dirac_3d();
    auto electric = d3.with_potential({{HermitianMatrix::identity(4), distance_power(ball, 1.0, 1.0)}});
    CHECK_THROWS_AS(scalar_certificate(electric, g), RejectedInput);
    CHECK_THROWS_AS(hardy_certificate(electric, convex_flat_hardy(ball), g), RejectedInput);
    CHECK_THROWS_AS(perturbation_certificate(electric, d3, convex_flat_hardy(ball), 1.0, g), RejectedInput);
}

TEST_CASE("Hardy-variant eigenvalues follow the derived formula") {
    Domain ball = Domain::unit_ball(3);
    auto g = BoundaryLayerGrid::make(ball);
    auto d3 = DiracCoefficients::dirac_3d();
    for (double lambda : {0.3, 0.5, 1.0, 2.0}) {
        CAPTURE(lambda);
        auto r = hardy_certificate(scalar_op(d3, ball, lambda), convex_flat_hardy(ball), g);
        double inner = g.shells.back().delta;
        CHECK(r.shell_min.back() * inner * inner == doctest::Approx(hardy_min_scaled(lambda)).epsilon(1e-4));
        CHECK(r.outcome == (hardy_min_scaled(lambda) > 0.0 ? CertificateOutcome::Certified
                                                            : CertificateOutcome::Falsified));
    }
}

TEST_CASE("Hardy function zero reduces to the scalar certificate") {
    Domain ball = Domain::unit_ball(3);
    auto g = BoundaryLayerGrid::make(ball);
    auto op = scalar_op(DiracCoefficients::dirac_3d(), ball, 1.0, 2.0);
    auto a = scalar_certificate(op, g);
    auto b = hardy_certificate(op, [](const Point&) { return 0.0; }, g);
    CHECK(a.outcome == b.outcome);
    CHECK(a.min_eigenvalue == doctest::Approx(b.min_eigenvalue));
}

TEST_CASE("perturbation branch") {
    Domain ball = Domain::unit_ball(3);
    auto g = BoundaryLayerGrid::make(ball);
    auto d3 = DiracCoefficients::dirac_3d();
    auto h0 = convex_flat_hardy(ball);
    auto electric_w = d3.with_potential({{HermitianMatrix::identity(4), distance_power(ball, 0.5, 1.0)}});

    // W = 0 leaves the Hardy-variant matrix of a certified V_s
    auto zero_w = perturbation_certificate(scalar_op(d3, ball, 2.0), d3, h0, 1.0, g);
    CHECK(zero_w.outcome == CertificateOutcome::Certified);

    // lambda = 1, W = 0.5/delta: C (1/4 + 1 - 1) - 1/4 is 0 at C = 1 and negative at C = 0.9
    auto wust = perturbation_certificate(scalar_op(d3, ball, 1.0), electric_w, h0, 1.0, g);
    CHECK(wust.outcome == CertificateOutcome::Certified);
    auto kato = perturbation_certificate(scalar_op(d3, ball, 1.0), electric_w, h0, 0.9, g);
    CHECK(kato.outcome == CertificateOutcome::Falsified);
    CHECK(wust.rule != kato.rule);

    // lambda = 0.6: 0.25 <= 0.36 - 0.25 fails
    auto low = perturbation_certificate(scalar_op(d3, ball, 0.6), electric_w, h0, 1.0, g);
    CHECK(low.outcome == CertificateOutcome::Falsified);
    CHECK_THROWS(perturbation_certificate(scalar_op(d3, ball, 1.0), electric_w, h0, 1.5, g));
}

TEST_CASE("convex-flat threshold certificate") {
    for (const Domain& d : {Domain::interval(0.0, 1.0), Domain::unit_ball(3)}) {
        CAPTURE(d.describe());
        auto g = BoundaryLayerGrid::make(d);
        auto free_op = d.dimension() == 1 ? DiracCoefficients::pauli_1d() : DiracCoefficients::dirac_3d();
        for (double lambda : {0.3, 0.4, 0.5, 0.6, 1.0, -0.7}) {
            CAPTURE(lambda);
            auto t = flat_threshold_certificate(free_op, lambda, g);
            CHECK(t.shift == doctest::Approx(std::max(0.0, 2.0 - std::abs(lambda))));
            CHECK(t.outcome == (std::abs(lambda) >= 0.5 ? CertificateOutcome::Certified
                                                         : CertificateOutcome::Falsified));
        }
    }
    CHECK_THROWS(flat_threshold_certificate(DiracCoefficients::pauli_2d(), 1.0,
                                            BoundaryLayerGrid::make(Domain::annulus(0.5))));
}

TEST_CASE("class membership examples") {
    Domain disk = Domain::unit_disk();
    auto g = BoundaryLayerGrid::make(disk);
    auto two = class_membership_alpha(distance_power(disk, 1.0, 2.0), 2.0, g);
    CHECK(two.member);
    REQUIRE(two.epsilon);
    CHECK(*two.epsilon == doctest::Approx(1.0));

    CHECK_FALSE(class_membership_alpha(distance_power(disk, 1.0, 0.5), 2.0, g).member);

    auto osc = distance_profile(
        disk, "sin(1/delta)/delta^2", [](double t) { return std::sin(1.0 / t) / (t * t); },
        [](double t) { return -std::cos(1.0 / t) / (t * t * t * t) - 2.0 * std::sin(1.0 / t) / (t * t * t); });
    CHECK_FALSE(class_membership_alpha(osc, 2.0, g).member);
    CHECK_THROWS(class_membership_alpha(distance_power(disk, 1.0, 2.0), 1.0, g));
}

TEST_CASE("mu estimates") {
    Domain disk = Domain::unit_disk();
    auto g = BoundaryLayerGrid::make(disk);
    CHECK(mu_estimate(constant_field(1.0, 2), g).mu == 0.0);

    auto wavy = distance_profile(
        disk, "2 + sin(ln delta)", [](double t) { return 2.0 + std::sin(std::log(t)); },
        [](double t) { return std::cos(std::log(t)) / t; });
    auto m = mu_estimate(wavy, g);
    double oracle = 0.0;
    for (std::size_t k = g.shells.size() - 8; k < g.shells.size(); ++k) {
        double l = std::log(g.shells[k].delta);
        oracle = std::max(oracle, std::abs(std::cos(l)) / (2.0 + std::sin(l)));
    }
    CHECK(m.mu == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(m.mu >= 0.33);
    CHECK(m.mu <= 1.0);
    CHECK(m.by_shell.size() == 8u);

    auto shrinking = distance_profile(
        disk, "1 + delta", [](double t) { return 1.0 + t; }, [](double) { return 1.0; });
    auto s = mu_estimate(shrinking, g);
    CHECK(s.mu < 1e-4);
    CHECK(s.by_shell.back() < s.by_shell.front());

    CHECK_THROWS_AS(mu_estimate(constant_field(0.5, 2), g), RejectedInput);
}

TEST_CASE("distance potential verdicts") {
    CHECK(distance_potential_verdict(0.0, 0.5, true));
    CHECK_FALSE(distance_potential_verdict(0.0, 0.5, false));
    CHECK(distance_potential_verdict(1.0, 1.01, false));
    CHECK_FALSE(distance_potential_verdict(1.0, 1.0, false));
    CHECK_THROWS(distance_potential_verdict(0.5, 1.0, true));
}

TEST_CASE("weighted identity residuals") {
    auto p2 = DiracCoefficients::pauli_2d();
    auto zero_h = constant_field(0.0, 2);

    // constant V and V = 0 are exact up to roundoff
    auto flat = weighted_identity_residual(p2.with_potential({{HermitianMatrix::sigma(3), constant_field(1.3, 2)}}),
                                           zero_h, 0.0, 0.02);
    CHECK(flat.residual <= 1e-11);
    REQUIRE(flat.lhs.size() == static_cast<std::size_t>(identity_test_function_count()));

    ScalarField h("x1 + x2^2/2", [](const Point& x) { return x[0] + 0.5 * x[1] * x[1]; },
                  [](const Point& x) {
                      Point g(2);
                      g << 1.0, x[1];
                      return g;
                  });
    auto zeta_only = weighted_identity_residual(p2, h, 3.0, 0.02);
    CHECK(zeta_only.residual <= 1e-11 * std::max(1.0, zeta_only.lhs.front()));

    auto linear = p2.with_potential({{HermitianMatrix::sigma(3), linear_field(0, 1.0, 0.0, 2)}});
    double r[3];
    double steps[3] = {0.02, 0.01, 0.005};
    for (int k = 0; k < 3; ++k) r[k] = weighted_identity_residual(linear, zero_h, 0.0, steps[k]).residual;
    for (int k = 0; k < 2; ++k) {
        double order = std::log(r[k] / r[k + 1]) / std::log(2.0);
        CHECK(order == doctest::Approx(2.0).epsilon(0.15));
    }

    auto electric = p2.with_potential({{HermitianMatrix::identity(2), constant_field(1.0, 2)}});
    CHECK_THROWS_AS(weighted_identity_residual(electric, zero_h, 0.0, 0.02), RejectedInput);
}
