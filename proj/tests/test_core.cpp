#include "confine/core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace confine;

namespace {

const cplx I(0.0, 1.0);

CMat anticommutator(const CMat& a, const CMat& b) { return a * b + b * a; }

CMat random_hermitian(std::mt19937& rng, int k) {
    std::normal_distribution<double> n;
    CMat m(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) m(i, j) = cplx(n(rng), n(rng));
    return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST_CASE("pauli_decompose on basis elements and a hand-computed matrix") {
    auto s3 = pauli_decompose(HermitianMatrix::sigma(3));
    CHECK(s3.v0 == 0.0);
    CHECK(s3.v1 == 0.0);
    CHECK(s3.v2 == 0.0);
    CHECK(s3.v3 == 1.0);

    auto id = pauli_decompose(HermitianMatrix::identity(2));
    CHECK(id.v0 == 1.0);
    CHECK(id.v3 == 0.0);

    // [[2, -i], [i, 0]]: v0 = tr/2 = 1, v1 = Re h01 = 0, v2 = -Im h01 = 1, v3 = (h00 - h11)/2 = 1
    CMat h(2, 2);
    h << 2.0, -I, I, 0.0;
    auto c = pauli_decompose(HermitianMatrix::from(h));
    CHECK(c.v0 == doctest::Approx(1.0));
    CHECK(c.v1 == doctest::Approx(0.0));
    CHECK(c.v2 == doctest::Approx(1.0));
    CHECK(c.v3 == doctest::Approx(1.0));
    CHECK((pauli_recompose(c) - h).norm() == doctest::Approx(0.0));
}

TEST_CASE("non-Hermitian input is refused with the deviation") {
    CMat h(2, 2);
    h << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_AS(HermitianMatrix::from(h), SymmetryViolation);
    try {
        HermitianMatrix::from(h);
    } catch (const SymmetryViolation& e) {
        CHECK(e.deviation() > 0.0);
    }
    CMat wrong_size = CMat::Identity(3, 3);
    CHECK_THROWS(HermitianMatrix::from(wrong_size));
}

TEST_CASE("pauli round trip on 1000 random Hermitian matrices") {
    std::mt19937 rng(20261016);
    int failures = 0;
    for (int n = 0; n < 1000; ++n) {
        CMat h = random_hermitian(rng, 2);
        CMat back = pauli_recompose(pauli_decompose(HermitianMatrix::from(h)));
        if ((back - h).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + h.norm())) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("anticommutation table of the built-in matrices") {
    for (int j = 1; j <= 3; ++j)
        for (int k = 1; k <= 3; ++k) {
            CMat s = anticommutator(HermitianMatrix::sigma(j).matrix(), HermitianMatrix::sigma(k).matrix());
            CMat a = anticommutator(HermitianMatrix::alpha(j).matrix(), HermitianMatrix::alpha(k).matrix());
            CMat s_expected = (j == k ? 2.0 : 0.0) * CMat::Identity(2, 2);
            CMat a_expected = (j == k ? 2.0 : 0.0) * CMat::Identity(4, 4);
            CHECK((s - s_expected).norm() == 0.0);
            CHECK((a - a_expected).norm() == 0.0);
        }
    CMat beta = HermitianMatrix::beta().matrix();
    for (int j = 1; j <= 3; ++j)
        CHECK(anticommutator(HermitianMatrix::alpha(j).matrix(), beta).norm() == 0.0);
    CHECK((beta * beta - CMat::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("gauge removal of v2") {
    PotentialSpec1D p;
    p.domain = Interval{0.0, 1.0};
    p.v1 = Coefficient::constant(0.3);

    SUBCASE("v2 = 0 leaves the problem unchanged") {
        GaugeRemoval g = gauge_remove_v2(p);
        CHECK(g.potential.v2.is_zero());
        CHECK(g.phase(0.7) == 0.0);
        CHECK(g.potential.at(0.4).v1 == 0.3);
    }
    SUBCASE("v2 = 1 gives a linear phase") {
        p.v2 = Coefficient::constant(1.0);
        GaugeRemoval g = gauge_remove_v2(p);
        CHECK(g.potential.v2.is_zero());
        CHECK(g.phase(0.8) - g.phase(0.2) == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(g.potential.at(0.4).v1 == 0.3);
    }
    SUBCASE("v2 = sin x on (0, pi) integrates to 1 - cos x") {
        p.domain = Interval{0.0, kPi};
        p.v2 = Coefficient::closed_form(Family::Sine, {1.0, 1.0, 0.0});
        GaugeRemoval g = gauge_remove_v2(p);
        for (double x : {0.3, 1.0, 2.5})
            CHECK(g.phase(x) - g.phase(g.anchor) == doctest::Approx(std::cos(g.anchor) - std::cos(x)).epsilon(1e-10));
    }
    SUBCASE("removal is idempotent") {
        p.v2 = Coefficient::constant(2.0);
        GaugeRemoval once = gauge_remove_v2(p);
        GaugeRemoval twice = gauge_remove_v2(once.potential);
        CHECK(twice.potential.v2.is_zero());
        CHECK(twice.phase(0.9) == 0.0);
    }
}

TEST_CASE("scalar potential check") {
    auto p2 = DiracCoefficients::pauli_2d();
    auto d3 = DiracCoefficients::dirac_3d();
    std::vector<Point> s2, s3;
    for (double t : {0.1, 0.4, 0.8}) {
        Point x2(2), x3(3);
        x2 << t, -0.5 * t;
        x3 << t, 0.2, -t;
        s2.push_back(x2);
        s3.push_back(x3);
    }
    ScalarField v2 = linear_field(0, 2.0, 1.0, 2);  // 1 + 2 x1, max 2.6 on s2
    CHECK(is_scalar_potential(p2.with_potential({{HermitianMatrix::sigma(3), v2}}), s2).scalar);
    CHECK(is_scalar_potential(d3.with_potential({{HermitianMatrix::beta(), linear_field(1, 1.0, 0.0, 3)}}), s3).scalar);

    ScalarCheck electric = is_scalar_potential(p2.with_potential({{HermitianMatrix::identity(2), v2}}), s2);
    CHECK_FALSE(electric.scalar);
    CHECK(electric.max_norm == doctest::Approx(2.0 * 2.6));

    CHECK_THROWS(is_scalar_potential(p2, {}));
}

TEST_CASE("velocity matrix of the built-in operators") {
    Point x1(1), x2(2), x3(3);
    x1 << 0.3;
    x2 << 0.1, 0.2;
    x3 << 0.1, 0.2, 0.3;
    CHECK((velocity_matrix(DiracCoefficients::pauli_1d(), x1) - 2.0 * Eigen::MatrixXd::Identity(1, 1)).norm() == 0.0);
    CHECK((velocity_matrix(DiracCoefficients::pauli_2d(), x2) - 2.0 * Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
    CHECK((velocity_matrix(DiracCoefficients::dirac_3d(), x3) - 4.0 * Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("distance functions are exact") {
    Domain iv = Domain::interval(-1.0, 3.0);
    for (double x : {-0.9, 0.0, 1.0, 2.5}) {
        Point p(1);
        p << x;
        CHECK(iv.distance(p) == std::min(x + 1.0, 3.0 - x));
    }
    Domain disk = Domain::unit_disk();
    Point q(2);
    q << 0.3, -0.4;
    CHECK(disk.distance(q) == doctest::Approx(0.5).epsilon(1e-15));
    Domain annulus = Domain::annulus(0.5);
    q << 0.0, 0.6;
    CHECK(annulus.distance(q) == doctest::Approx(0.1).epsilon(1e-12));
    Domain punctured = Domain::punctured_unit_disk();
    q << 0.1, 0.0;
    CHECK(punctured.distance(q) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("coefficient catalog values") {
    Interval iv{0.0, 1.0};
    Coefficient power = Coefficient::closed_form(Family::Power, {0.6, 0.4, 1.0});
    CHECK(power.value(0.25, iv) == doctest::Approx(0.6 / 0.25 + 0.4 / 0.75));
    EndpointAsymptotics right = power.asymptotics(Side::Right, iv);
    CHECK(right.inverse_distance == doctest::Approx(0.4));
    Coefficient ch = Coefficient::closed_form(Family::Chernoff, {1.5});
    CHECK(ch.value(2.0, Interval{-1e300, 1e300}) == doctest::Approx(std::pow(5.0, 0.75)));
    Coefficient tab = Coefficient::tabulated({0.0, 0.5, 1.0}, {0.0, 0.5, 1.0});
    CHECK(tab.value(0.3, iv) == doctest::Approx(0.3));
}
