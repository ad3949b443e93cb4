#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "renormlab/henon.hpp"

using namespace renormlab;

namespace {

// shared expensive fixtures, built once
const HenonCascade& cascade005() {
    static HenonCascade c = henon_cascade(0.05, 4);
    return c;
}

const RenormStep& step005() {
    static RenormStep st =
        renormalize(normalize_henon(henon_family(cascade005().a_star_estimate, 0.05)));
    return st;
}

UnimodalMap normalized_f(double a) {
    return normalize_henon(henon_family(a, 0.0)).f;
}

double sup_delta(const Prerenorm& pre) {
    double worst = 0.0;
    for (int i = 0; i <= 32; ++i) {
        double x = pre.V.lo + pre.V.width() * i / 32.0;
        for (int j = 0; j <= 16; ++j) {
            double y = pre.V.lo + pre.V.width() * j / 16.0;
            worst = std::max(worst, std::abs(pre.delta(x, y)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("apply: degenerate and family forms") {
    HenonLikeMap D = henon_family(2.0, 0.0);
    CHECK(D.degenerate());
    Point2 q = D.apply({0.3, 0.5});
    CHECK(q.x == doctest::Approx(1.0 - 2.0 * 0.09).epsilon(1e-12));
    CHECK(q.y == doctest::Approx(0.3));

    // (x,y) -> (1 - a x^2 - b y, x) at p=(0,1) gives (1-b, 0)
    double b = 0.3;
    HenonLikeMap F = henon_family(2.0, b);
    Point2 r = F.apply({0.0, 1.0});
    CHECK(r.x == doctest::Approx(1.0 - b).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(0.0));

    CHECK_THROWS_AS(F.apply({5.0, 0.0}), DomainError);
    CHECK_FALSE(F.try_apply({5.0, 0.0}).has_value());
}

TEST_CASE("apply twice returns to a Newton-solved period-2 point") {
    HenonLikeMap F = henon_family(1.2, 0.1);
    // oracle seed: period-2 x-values of the 1D part, x = (1 ± sqrt(4a-3))/2a
    double s = std::sqrt(4 * 1.2 - 3);
    Eigen::Vector2d p(0.0, 0.0);
    p << (1 + s) / 2.4, (1 - s) / 2.4;
    auto G = [&](const Eigen::Vector2d& v) {
        Point2 q = F.apply(F.apply({v[0], v[1]}));
        return Eigen::Vector2d(q.x - v[0], q.y - v[1]);
    };
    for (int it = 0; it < 40; ++it) {
        Eigen::Vector2d g = G(p);
        if (g.norm() < 1e-14) break;
        Eigen::Matrix2d Jm;
        const double h = 1e-7;
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d ph = p;
            ph[k] += h;
            Jm.col(k) = (G(ph) - g) / h;
        }
        p -= Jm.partialPivLu().solve(g);
    }
    Point2 q2 = F.apply(F.apply({p[0], p[1]}));
    CHECK(std::abs(q2.x - p[0]) < 1e-10);
    CHECK(std::abs(q2.y - p[1]) < 1e-10);
    // genuinely period 2, not fixed
    Point2 q1 = F.apply({p[0], p[1]});
    CHECK(std::abs(q1.x - p[0]) + std::abs(q1.y - p[1]) > 0.1);
}

TEST_CASE("jacobian: constant for eps=b y, zero when degenerate, matches FD") {
    HenonLikeMap F = henon_family(1.4, 0.25);
    for (double x : {-0.5, 0.0, 0.7})
        for (double y : {-0.6, 0.2})
            CHECK(F.jacobian({x, y}) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(henon_family(1.4, 0.0).jacobian({0.2, 0.2}) == 0.0);

    // |det DF| via finite differences of apply
    Point2 p{0.3, -0.4};
    const double h = 1e-6;
    auto ap = [&](double x, double y) { return F.apply({x, y}); };
    Point2 fx1 = ap(p.x + h, p.y), fx0 = ap(p.x - h, p.y);
    Point2 fy1 = ap(p.x, p.y + h), fy0 = ap(p.x, p.y - h);
    double a11 = (fx1.x - fx0.x) / (2 * h), a12 = (fy1.x - fy0.x) / (2 * h);
    double a21 = (fx1.y - fx0.y) / (2 * h), a22 = (fy1.y - fy0.y) / (2 * h);
    double det = a11 * a22 - a12 * a21;
    CHECK(std::abs(std::abs(det) - F.jacobian(p)) < 1e-7);
    // analytic differential agrees with FD entrywise
    Eigen::Matrix2d Dm = F.differential(p);
    CHECK(std::abs(Dm(0, 0) - a11) < 1e-6);
    CHECK(std::abs(Dm(0, 1) - a12) < 1e-6);
    CHECK(std::abs(Dm(1, 0) - a21) < 1e-6);
    CHECK(std::abs(Dm(1, 1) - a22) < 1e-6);
}

TEST_CASE("fixed saddles: degenerate embedding and eigenvalue structure") {
    // eps = 0: fixed points are (x_i, x_i) with x_i solving 1 - a x^2 = x
    double a = 1.4;
    HenonLikeMap D = henon_family(a, 0.0);
    double disc = std::sqrt(1 + 4 * a);
    double x_flip = (-1 + disc) / (2 * a);     // f' < 0 here
    double x_reg = (-1 - disc) / (2 * a);      // f' > 0 here
    auto [b0, b1] = fixed_saddles(D);
    CHECK(b0.regular);
    CHECK_FALSE(b1.regular);
    CHECK(b0.p.x == doctest::Approx(x_reg).epsilon(1e-9));
    CHECK(b0.p.y == doctest::Approx(x_reg).epsilon(1e-9));
    CHECK(b1.p.x == doctest::Approx(x_flip).epsilon(1e-9));
    // triangular differential: eigenvalues {f'(x), 0}
    CHECK(b0.eigs[0] == doctest::Approx(-2 * a * x_reg).epsilon(1e-9));
    CHECK(std::abs(b0.eigs[1]) < 1e-12);
    CHECK(b1.eigs[0] == doctest::Approx(-2 * a * x_flip).epsilon(1e-9));

    // small b: |eigenvalue product| equals the Jacobian b at both saddles
    double b = 0.1;
    HenonLikeMap F = henon_family(a, b);
    auto [s0, s1] = fixed_saddles(F);
    CHECK(std::abs(std::abs(s0.eigs[0] * s0.eigs[1]) - b) < 1e-10);
    CHECK(std::abs(std::abs(s1.eigs[0] * s1.eigs[1]) - b) < 1e-10);
    CHECK(s0.eigs[0] > 1.0);
    CHECK(s1.eigs[0] < -1.0);
}

TEST_CASE("prerenormalize: eps=0 reduces the trace to f o f") {
    HenonLikeMap F = normalize_henon(henon_family(1.401155, 0.0));
    Prerenorm pre = prerenormalize(F);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double x = pre.V.lo + pre.V.width() * i / 200.0;
        worst = std::max(worst, std::abs(pre.g(x) - F.f.f(F.f.f(x))));
    }
    CHECK(worst < 1e-10);
    CHECK(pre.delta.is_zero());
}

TEST_CASE("prerenormalize: first-order expansion of the first-return trace") {
    // G1 = f^2 + v o f + (f' o f) v + O(t^2) with v(x) = -eps(x, f^{-1}(x))
    UnimodalMap f = normalized_f(1.40);
    ChebSeries df = f.f.derivative();
    const double t = 1e-4;
    ChebSeries2D eps = ChebSeries2D::fit(
        [t](double, double y) { return t * y; }, kHenonBox, 2, 2);
    HenonLikeMap F = HenonLikeMap::from_parts(f, eps, kHenonBox);
    Prerenorm pre = prerenormalize(F);
    Interval branch{f.c + 0.02, f.f.domain().hi};
    auto finv = [&](double x) { return invert_monotone(f.f, x, branch); };
    // the reduction v(x) = -eps(x, f^{-1}(x)) uses the expanding branch, so
    // the identity f^{-1}(f(x)) = x that it relies on holds only right of c
    Interval xs{std::max(pre.V.lo, f.c + 0.05), pre.V.hi - 0.01};
    REQUIRE(xs.width() > 0.1);
    int used = 0;
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
        double x = xs.lo + xs.width() * i / 40.0;
        if (f.f(x) > f.f(branch.lo) - 1e-9) continue;  // inverse out of reach
        ++used;
        auto v = [&](double z) { return -t * finv(z); };
        double rhs = f.f(f.f(x)) + v(f.f(x)) + df(f.f(x)) * v(x);
        for (int j = 0; j <= 8; ++j) {
            double y = pre.V.lo + pre.V.width() * (0.05 + 0.9 * j / 8.0);
            double lhs = pre.g(x) - pre.delta(x, y);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    CHECK(used >= 30);
    CHECK(worst < 50 * t * t);  // O(t^2) with a measured modest constant
}

TEST_CASE("prerenormalize: sup|delta| is quadratic in sup|eps|") {
    UnimodalMap f = normalized_f(1.401155);
    std::vector<double> scales{1e-2, 1e-3, 1e-4}, sups;
    for (double t : scales) {
        ChebSeries2D eps = ChebSeries2D::fit(
            [t](double, double y) { return t * y; }, kHenonBox, 2, 2);
        HenonLikeMap F = HenonLikeMap::from_parts(f, eps, kHenonBox);
        sups.push_back(sup_delta(prerenormalize(F)));
    }
    double slope = (std::log(sups.front()) - std::log(sups.back())) /
                   (std::log(scales.front()) - std::log(scales.back()));
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("renormalize: eps=0 reduces to the 1D operator") {
    HenonLikeMap F = normalize_henon(henon_family(1.401155, 0.0));
    RenormStep st = renormalize(F);
    CHECK(st.RF.eps_norm < 1e-13);
    Renorm1D r1 = renorm_c(F.f);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double x = -1.0 + 2.0 * i / 200.0;
        worst = std::max(worst, std::abs(st.RF.f.f(x) - r1.Rf.f(x)));
    }
    CHECK(worst < 1e-9);
    CHECK(st.lambda == doctest::Approx(r1.lambda).epsilon(1e-9));
}

TEST_CASE("renormalize: new eps is quadratically small") {
    UnimodalMap f = normalized_f(1.401155);
    std::vector<double> scales{1e-2, 1e-3, 1e-4}, sups;
    for (double t : scales) {
        ChebSeries2D eps = ChebSeries2D::fit(
            [t](double, double y) { return t * y; }, kHenonBox, 2, 2);
        HenonLikeMap F = HenonLikeMap::from_parts(f, eps, kHenonBox);
        sups.push_back(renormalize(F).RF.eps_norm);
    }
    double slope = (std::log(sups.front()) - std::log(sups.back())) /
                   (std::log(scales.front()) - std::log(scales.back()));
    CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("renormalize: conjugacy residual on a point grid") {
    const RenormStep& st = step005();
    CHECK(st.RF.eps_norm > 1e-13);  // genuinely two-dimensional
    double worst = 0.0;
    int valid = 0;
    for (int i = 0; i < 15; ++i) {
        for (int j = 0; j < 15; ++j) {
            Point2 p{-1.0 + 2.0 * i / 14.0, -1.0 + 2.0 * j / 14.0};
            try {
                Point2 q = st.Lambda_inverse(p);
                q = st.H_inverse(q);
                q = st.F.apply(st.F.apply(q));
                q = st.H(q);
                q = st.Lambda(q);
                Point2 r = st.RF.apply(p);
                worst = std::max({worst, std::abs(q.x - r.x), std::abs(q.y - r.y)});
                ++valid;
            } catch (const std::exception&) {
            }
        }
    }
    CHECK(valid >= 200);
    CHECK(worst < 1e-9);
}

TEST_CASE("psi_c preserves vertical lines; differentials match FD") {
    const RenormStep& st = step005();
    for (int i = 0; i < 20; ++i) {
        double x = -0.95 + 1.9 * i / 19.0;
        double x_img = st.psi_c({x, -0.8}).x;
        double spread = 0.0;
        for (int j = 0; j <= 10; ++j) {
            double y = -0.8 + 1.6 * j / 10.0;
            spread = std::max(spread, std::abs(st.psi_c({x, y}).x - x_img));
        }
        CHECK(spread < 1e-10);
    }
    // analytic dpsi_v / dpsi_c vs centered finite differences
    const double h = 1e-6;
    for (Point2 p : {Point2{0.3, -0.2}, Point2{-0.5, 0.4}}) {
        for (int which = 0; which < 2; ++which) {
            auto psi = [&](Point2 q) {
                return which == 0 ? st.psi_v(q) : st.psi_c(q);
            };
            Eigen::Matrix2d A =
                which == 0 ? st.dpsi_v(p) : st.dpsi_c(p);
            Point2 px1 = psi({p.x + h, p.y}), px0 = psi({p.x - h, p.y});
            Point2 py1 = psi({p.x, p.y + h}), py0 = psi({p.x, p.y - h});
            CHECK(std::abs(A(0, 0) - (px1.x - px0.x) / (2 * h)) < 1e-6);
            CHECK(std::abs(A(0, 1) - (py1.x - py0.x) / (2 * h)) < 1e-6);
            CHECK(std::abs(A(1, 0) - (px1.y - px0.y) / (2 * h)) < 1e-6);
            CHECK(std::abs(A(1, 1) - (py1.y - py0.y) / (2 * h)) < 1e-6);
        }
    }
}

TEST_CASE("the rescaled horizontal conjugacy expands") {
    const RenormStep& st = step005();
    double min_sv = 1e300;
    for (int i = 0; i <= 12; ++i) {
        for (int j = 0; j <= 12; ++j) {
            Point2 p{-1.0 + 2.0 * i / 12.0, -1.0 + 2.0 * j / 12.0};
            Point2 q;
            try {
                q = st.psi_v(p);
            } catch (const std::exception&) {
                continue;
            }
            // D(Lambda o H) at a point of the first renormalization piece
            double phix = st.F.df(q.x) - st.F.eps_dx(q.x, q.y);
            double phiy = -st.F.eps_dy(q.x, q.y);
            Eigen::Matrix2d m;
            m << st.s.scale * phix, st.s.scale * phiy, 0.0, st.s.scale;
            Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
            min_sv = std::min(min_sv, svd.singularValues()[1]);
        }
    }
    CHECK(min_sv > 2.0);
}

TEST_CASE("verify_henon_like report") {
    HenonReport ok = verify_henon_like(henon_family(1.4, 0.1));
    CHECK(ok.ok);
    CHECK(ok.dy_sign_constant);
    CHECK_FALSE(ok.jacobian_zero);
    CHECK(ok.xder_margin > 0.0);
    CHECK(ok.eps_norm == doctest::Approx(0.17).epsilon(0.01));  // 0.1 * y_max

    // sign-changing d eps / d y must be flagged with a location
    UnimodalMap f = normalized_f(1.4);
    ChebSeries2D eps = ChebSeries2D::fit(
        [](double, double y) { return 0.01 * y * y; }, kHenonBox, 2, 4);
    HenonReport bad = verify_henon_like(HenonLikeMap::from_parts(f, eps, kHenonBox));
    CHECK_FALSE(bad.ok);
    CHECK_FALSE(bad.dy_sign_constant);

    HenonReport deg = verify_henon_like(henon_family(1.4, 0.0));
    CHECK(deg.ok);
    CHECK(deg.jacobian_zero);
}

TEST_CASE("cascade at b=0.05: roots, ratio, extrapolation") {
    const HenonCascade& cas = cascade005();
    REQUIRE(cas.a_super.size() == 4);
    CHECK(cas.a_super[0] == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t k = 1; k < cas.a_super.size(); ++k)
        CHECK(cas.a_super[k] > cas.a_super[k - 1]);
    CHECK(cas.a_super[1] == doctest::Approx(1.3877).epsilon(1e-3));
    CHECK(cas.delta_estimate > 4.3);
    CHECK(cas.delta_estimate < 5.0);
    CHECK(cas.a_star_estimate == doctest::Approx(1.4785).epsilon(1e-3));
    // each root is a genuine sign change of the diagnostic: the located map
    // renormalizes k+1 times right above the root
    HenonLikeMap F = normalize_henon(henon_family(cas.a_star_estimate, 0.05));
    for (int k = 0; k < 4; ++k) F = renormalize(F).RF;
    CHECK(F.f.c > -1.0);
}

TEST_CASE("cascade survives the large-eps regime (b=0.3)") {
    HenonCascade cas = henon_cascade(0.3, 4);
    REQUIRE(cas.a_super.size() == 4);
    for (std::size_t k = 1; k < cas.a_super.size(); ++k)
        CHECK(cas.a_super[k] > cas.a_super[k - 1]);
    CHECK(cas.a_super[1] == doctest::Approx(1.843).epsilon(2e-3));
    CHECK(cas.a_star_estimate > 1.94);
    CHECK(cas.a_star_estimate < 1.96);
}

TEST_CASE("locate_infinitely_renormalizable validates the depth") {
    double a = locate_infinitely_renormalizable(0.05, 4);
    CHECK(a == doctest::Approx(cascade005().a_star_estimate).epsilon(2e-3));
    HenonLikeMap F = normalize_henon(henon_family(a, 0.05));
    for (int k = 0; k < 4; ++k) CHECK_NOTHROW(F = renormalize(F).RF);
    // eps contracts super-exponentially down the tower
    CHECK(F.eps_norm < 1e-6);
}
