#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "renormlab/cheb.hpp"

using namespace renormlab;

TEST_CASE("evaluate basics") {
    Interval I{-1.0, 1.0};
    CHECK(ChebSeries::constant(3.0, I)(0.77) == doctest::Approx(3.0));
    CHECK(ChebSeries::identity(I)(0.5) == doctest::Approx(0.5));
    // x^2 = (T0 + T2)/2
    ChebSeries x2({0.5, 0.0, 0.5}, I);
    CHECK(x2(0.25) == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK_THROWS_AS(x2(1.5), DomainError);
}

TEST_CASE("fit recovers exact coefficients for x^2 and identity") {
    Interval I{-1.0, 1.0};
    ChebSeries x2 = ChebSeries::fit([](double x) { return x * x; }, I, 8);
    REQUIRE(x2.coeffs().size() == 9);
    CHECK(x2.coeffs()[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(x2.coeffs()[1]) < 1e-14);
    CHECK(x2.coeffs()[2] == doctest::Approx(0.5).epsilon(1e-14));
    for (int k = 3; k <= 8; ++k) CHECK(std::abs(x2.coeffs()[k]) < 1e-14);

    ChebSeries id = ChebSeries::fit([](double x) { return x; }, I, 6);
    CHECK(std::abs(id.coeffs()[0]) < 1e-15);
    CHECK(id.coeffs()[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fit/evaluate round trip oracle: exp on 1000 probe points") {
    Interval I{-1.0, 1.0};
    ChebSeries e = ChebSeries::fit([](double x) { return std::exp(x); }, I, 30);
    CHECK(e.resolved());
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double x = -1.0 + 2.0 * i / 999.0;
        worst = std::max(worst, std::abs(e(x) - std::exp(x)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("fit on shifted domain") {
    Interval I{0.3, 2.7};
    ChebSeries s = ChebSeries::fit([](double x) { return std::sin(3 * x); }, I, 40);
    CHECK(s.resolved());
    CHECK(s(1.234) == doctest::Approx(std::sin(3 * 1.234)).epsilon(1e-13));
}

TEST_CASE("derivative") {
    Interval I{-1.0, 1.0};
    CHECK(ChebSeries::constant(4.0, I).derivative().sup_norm() == 0.0);
    ChebSeries x2 = ChebSeries::fit([](double x) { return x * x; }, I, 8);
    CHECK(x2.derivative()(1.0) == doctest::Approx(2.0).epsilon(1e-13));
    // d/dx fit(sin) vs fit(cos), oracle by direct comparison
    ChebSeries s = ChebSeries::fit([](double x) { return std::sin(x); }, I, 30);
    ChebSeries c = ChebSeries::fit([](double x) { return std::cos(x); }, I, 30);
    ChebSeries ds = s.derivative();
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double x = -1.0 + i / 100.0;
        worst = std::max(worst, std::abs(ds(x) - c(x)));
    }
    CHECK(worst < 1e-10);

    // Scaled domain: d/dx sin(3x) = 3cos(3x) on [0.3, 2.7]
    Interval J{0.3, 2.7};
    ChebSeries s3 = ChebSeries::fit([](double x) { return std::sin(3 * x); }, J, 40);
    CHECK(s3.derivative()(1.0) == doctest::Approx(3 * std::cos(3.0)).epsilon(1e-11));
}

TEST_CASE("compose") {
    Interval I{-1.0, 1.0};
    ChebSeries f = ChebSeries::fit([](double x) { return std::exp(x); }, I, 30);
    ChebSeries comp = compose(f, ChebSeries::identity(I));
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        double x = -1.0 + i / 50.0;
        worst = std::max(worst, std::abs(comp(x) - f(x)));
    }
    CHECK(worst < 1e-13);

    ChebSeries x2 = ChebSeries::fit([](double x) { return x * x; }, I, 8);
    CHECK(compose(x2, x2)(0.5) == doctest::Approx(0.0625).epsilon(1e-13));

    // Range escape detection
    ChebSeries big = ChebSeries::fit([](double x) { return 3.0 * x; }, I, 4);
    ChebSeries narrow = ChebSeries::fit([](double x) { return x; }, Interval{-0.5, 0.5}, 4);
    CHECK_THROWS_AS(compose(narrow, big), CompositionError);
}

TEST_CASE("invert_monotone") {
    Interval I{-1.0, 1.0};
    CHECK(invert_monotone(ChebSeries::identity(I), 0.3, I) ==
          doctest::Approx(0.3).epsilon(1e-13));
    ChebSeries x3 = ChebSeries::fit([](double x) { return x * x * x; },
                                    Interval{0.0, 1.0}, 10);
    CHECK(invert_monotone(x3, 0.125, Interval{0.0, 1.0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
    // round trip property on a monotone series
    ChebSeries m = ChebSeries::fit([](double x) { return std::tanh(2 * x) + 0.1 * x; }, I, 40);
    for (double y : {-0.9, -0.3, 0.0, 0.4, 0.8}) {
        double x = invert_monotone(m, y, I);
        CHECK(std::abs(m(x) - y) < 1e-12);
    }
    ChebSeries x2 = ChebSeries::fit([](double x) { return x * x; }, I, 8);
    CHECK_THROWS_AS(invert_monotone(x2, 0.5, I), MonotoneError);
}

TEST_CASE("nonlinearity") {
    Interval I{-1.0, 1.0};
    // affine -> 0
    ChebSeries aff = ChebSeries::fit([](double x) { return 2 * x + 1; }, I, 6);
    CHECK(nonlinearity(aff).sup_norm() < 1e-12);
    // exp -> constant 1
    ChebSeries e = ChebSeries::fit([](double x) { return std::exp(x); }, I, 30);
    ChebSeries eta = nonlinearity(e);
    for (double x : {-0.9, 0.0, 0.7}) CHECK(eta(x) == doctest::Approx(1.0).epsilon(1e-11));
    // parabola has vanishing derivative at 0
    ChebSeries x2 = ChebSeries::fit([](double x) { return x * x; }, I, 8);
    CHECK_THROWS_AS(nonlinearity(x2), SingularityError);
}

TEST_CASE("nonlinearity chain rule for two fixed cubic diffeomorphisms") {
    // eta_{psi o phi}(x) = eta_psi(phi(x)) * Dphi(x) + eta_phi(x)
    Interval I{-1.0, 1.0};
    // cubic diffeos with derivative bounded away from 0 on [-1,1]
    auto phi_fn = [](double x) { return x + 0.21 * x * x + 0.05 * x * x * x; };
    auto psi_fn = [](double x) { return 0.9 * x - 0.13 * x * x + 0.04 * x * x * x; };
    ChebSeries phi = ChebSeries::fit(phi_fn, I, 20);
    // psi must be defined on the range of phi
    Interval J{phi_fn(-1.0) - 0.01, phi_fn(1.0) + 0.01};
    ChebSeries psi = ChebSeries::fit(psi_fn, J, 20);
    ChebSeries comp = compose(psi, phi);
    ChebSeries eta_comp = nonlinearity(comp);
    ChebSeries eta_phi = nonlinearity(phi);
    ChebSeries eta_psi = nonlinearity(psi);
    ChebSeries dphi = phi.derivative();
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double x = -1.0 + i / 100.0;
        double lhs = eta_comp(x);
        double rhs = eta_psi(phi(x)) * dphi(x) + eta_phi(x);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("2D fit, eval, partials, slice") {
    Box B{{-1.0, 1.0}, {-1.0, 1.0}};
    auto fn = [](double x, double y) { return std::sin(x) * std::exp(0.5 * y) + x * y; };
    ChebSeries2D s = ChebSeries2D::fit(fn, B, 24, 12);
    CHECK(s.resolved());
    CHECK(s(0.3, -0.7) == doctest::Approx(fn(0.3, -0.7)).epsilon(1e-12));
    auto dx = s.derivative_x();
    auto dy = s.derivative_y();
    CHECK(dx(0.3, -0.7) ==
          doctest::Approx(std::cos(0.3) * std::exp(-0.35) - 0.7).epsilon(1e-10));
    CHECK(dy(0.3, -0.7) ==
          doctest::Approx(0.5 * std::sin(0.3) * std::exp(-0.35) + 0.3).epsilon(1e-10));
    ChebSeries line = s.slice_y(-0.7);
    CHECK(line(0.3) == doctest::Approx(fn(0.3, -0.7)).epsilon(1e-12));
    CHECK(ChebSeries2D::zero(B).is_zero());
}

TEST_CASE("resolution flag") {
    Interval I{-1.0, 1.0};
    // |x| is not analytic; low-degree fit must flag unresolved
    ChebSeries bad = ChebSeries::fit([](double x) { return std::abs(x); }, I, 21);
    CHECK_FALSE(bad.resolved());
    ChebSeries good = ChebSeries::fit([](double x) { return std::exp(x); }, I, 30);
    CHECK(good.resolved());
}

TEST_CASE("affine map helpers") {
    AffineMap s = AffineMap::between(Interval{-1.0, -0.2}, Interval{-1.0, 1.0}, -1);
    CHECK(s(-1.0) == doctest::Approx(1.0));
    CHECK(s(-0.2) == doctest::Approx(-1.0));
    AffineMap si = s.inverse();
    CHECK(si(s(-0.63)) == doctest::Approx(-0.63).epsilon(1e-14));
}
