#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "renormlab/microscope.hpp"

using namespace renormlab;

namespace {

constexpr double kA1D = 1.4011551890920506;  // infinitely renormalizable
constexpr double kSigma = 0.3995352805;      // 1/lambda of the 1D fixed point

const RenormTower& degenerate_tower() {
    static RenormTower tw =
        build_tower(normalize_henon(henon_family(kA1D, 0.0)), 6);
    return tw;
}

const RenormTower& tower03() {
    static RenormTower tw = [] {
        double a = locate_infinitely_renormalizable(0.3, 4);
        return build_tower(normalize_henon(henon_family(a, 0.3)), 3);
    }();
    return tw;
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_CASE("word values and the odometer") {
    for (unsigned long v = 0; v < 32; ++v) {
        Word w = Word::from_value(v, 5);
        CHECK(w.value() == v);
        CHECK(w.value() < (1ul << w.length()));
        CHECK(w.successor().value() == (v + 1) % 32);  // carry, with wrap
    }
    CHECK(Word::vs(4).value() == 0);
    CHECK(Word::from_value(5, 4).str() == "cvcv");  // least significant first
    Word all_c = Word::from_value(15, 4);
    CHECK(all_c.str() == "cccc");
    CHECK(all_c.successor() == Word::vs(4));
}

TEST_CASE("degenerate tower: no tilt, universal diagonal limits") {
    const RenormTower& tw = degenerate_tower();
    REQUIRE(tw.complete());
    REQUIRE(tw.depth() == 6);
    for (const TowerLevel& lv : tw.levels) {
        CHECK(lv.t == 0.0);
        CHECK(lv.beta < 0.0);
        CHECK(std::abs(lv.D(1, 0)) < 1e-12);
        CHECK(lv.tip_residual < 1e-11);
    }
    CHECK(tw.levels.back().alpha ==
          doctest::Approx(kSigma * kSigma).epsilon(1e-3));
    CHECK(tw.levels.back().beta == doctest::Approx(-kSigma).epsilon(1e-3));
    // deviations shrink along the tower
    for (int k : {2, 3}) {
        double d0 = std::abs(tw.levels[k].alpha - kSigma * kSigma);
        double d1 = std::abs(tw.levels[k + 2].alpha - kSigma * kSigma);
        CHECK(d1 < d0 + 1e-12);
    }
}

TEST_CASE("tips: coherence, graph membership, orbit containment") {
    const RenormTower& tw = degenerate_tower();
    // psi_v at level k sends tau_{k+1} to tau_k
    for (int k = 0; k < tw.depth(); ++k) {
        Point2 pulled = tw.levels[k].step.psi_v(tw.tip(k + 1));
        CHECK(dist(pulled, tw.tip(k)) < 1e-10);
    }
    // a degenerate map's tip lies on the graph {(f(x), x)}
    Point2 tau = tw.tip(0);
    CHECK(std::abs(tau.x - tw.map(0).f.f(tau.y)) < 1e-10);
    // the forward orbit of the tip returns to the v-piece every 2^n steps
    for (int n = 1; n <= 4; ++n) {
        std::vector<Piece> ps = pieces(tw, n);
        const Piece& vpiece = ps[0];
        Point2 p = tau;
        for (int i = 0; i < (1 << n); ++i) p = tw.map(0).apply(p);
        CHECK(vpiece.bbox.x.contains(p.x, 1e-6));
        CHECK(vpiece.bbox.y.contains(p.y, 1e-6));
    }
}

TEST_CASE("psi_word: identity, conjugacy, contraction bound") {
    const RenormTower& tw = degenerate_tower();
    PsiMap empty(tw, Word::vs(0));
    Point2 p0{0.37, -0.81};
    CHECK(dist(empty(p0), p0) < 1e-15);
    Eigen::Matrix2d id = empty.differential(p0);
    CHECK((id - Eigen::Matrix2d::Identity()).norm() < 1e-15);

    // Psi^n_{v..v} o (R^n F) = F^{2^n} o Psi^n_{v..v}
    for (int n = 1; n <= 3; ++n) {
        PsiMap psi(tw, Word::vs(n));
        double worst = 0.0;
        int valid = 0;
        for (int i = 0; i < 50; ++i) {
            Point2 p{-0.9 + 1.8 * (i % 10) / 9.0, -0.9 + 1.8 * (i / 10) / 4.0};
            try {
                Point2 lhs = psi(tw.map(n).apply(p));
                Point2 rhs = psi(p);
                for (int j = 0; j < (1 << n); ++j) rhs = tw.map(0).apply(rhs);
                worst = std::max(worst, dist(lhs, rhs));
                ++valid;
            } catch (const std::exception&) {
            }
        }
        CHECK(valid >= 40);
        CHECK(worst < 1e-8);
    }

    // |D Psi^n_w| <= C sigma^n with C fitted once at n = 2
    std::vector<Point2> samples{{0.0, 0.0}, {-0.7, 0.5}, {0.6, -0.8}};
    double C = 0.0;
    for (unsigned long v = 0; v < 4; ++v) {
        PsiMap psi(tw, Word::from_value(v, 2));
        for (Point2 p : samples) {
            C = std::max(C, psi.differential(p).norm() / (kSigma * kSigma));
        }
    }
    CHECK(C < 3.0);
    for (int n = 3; n <= 5; ++n) {
        for (unsigned long v = 0; v < (1ul << n); ++v) {
            PsiMap psi(tw, Word::from_value(v, n));
            for (Point2 p : samples) {
                CHECK(psi.differential(p).norm() <=
                      1.02 * C * std::pow(kSigma, n));
            }
        }
    }
}

TEST_CASE("pieces: count, projections, permutation, diameters") {
    const RenormTower& tw = degenerate_tower();
    std::vector<Piece> p1 = pieces(tw, 1);
    REQUIRE(p1.size() == 2);
    // disjoint projections onto both axes at level 1
    bool x_disjoint =
        p1[0].bbox.x.hi < p1[1].bbox.x.lo || p1[1].bbox.x.hi < p1[0].bbox.x.lo;
    bool y_disjoint =
        p1[0].bbox.y.hi < p1[1].bbox.y.lo || p1[1].bbox.y.hi < p1[0].bbox.y.lo;
    CHECK(x_disjoint);
    CHECK(y_disjoint);

    for (int n = 1; n <= 4; ++n) {
        CHECK(pieces(tw, n).size() == (1ul << n));
    }

    // F maps each piece into the successor piece (odometer on pieces)
    std::vector<Piece> p3 = pieces(tw, 3);
    for (const Piece& pc : p3) {
        PsiMap psi(tw, pc.word);
        const Piece& target = p3[pc.word.successor().value()];
        const Box& B = tw.map(3).box;
        bool wrap = pc.word.value() == 7;  // the all-c word carries into F_3
        for (int i = 0; i < 20; ++i) {
            Point2 z{B.x.mid() + 0.4 * B.x.width() * ((i % 5) - 2) / 2.0,
                     B.y.mid() + 0.4 * B.y.width() * ((i / 5) - 1.5) / 2.0};
            if (wrap) {
                // the wrap identity reads F o Psi_w = Psi_{p(w)} o F_3, so it
                // only covers samples whose F_3-image stays in the box
                auto f3z = tw.map(3).try_apply(z);
                if (!f3z || !tw.map(3).contains(*f3z)) continue;
            }
            Point2 img = tw.map(0).apply(psi(z));
            CHECK(target.bbox.x.contains(img.x, 1e-6));
            CHECK(target.bbox.y.contains(img.y, 1e-6));
        }
    }

    // diam B^n_w <= C sigma^n, C fitted at n = 2
    double C = 0.0;
    for (const Piece& pc : pieces(tw, 2)) {
        C = std::max(C, pc.diam / (kSigma * kSigma));
    }
    for (int n = 3; n <= 5; ++n) {
        for (const Piece& pc : pieces(tw, n)) {
            CHECK(pc.diam <= 1.05 * C * std::pow(kSigma, n));
        }
    }
}

TEST_CASE("cantor points: tip limit, injectivity, odometer tracking") {
    const RenormTower& tw = degenerate_tower();
    Point2 tau = tw.tip(0);
    double prev = 1e300;
    for (int n = 1; n <= 6; ++n) {
        double d = dist(cantor_point(tw, Word::vs(n)), tau);
        CHECK(d < 0.01 * std::pow(kSigma, n));
        CHECK(d < prev);
        prev = d;
    }
    // distinct length-6 words code distinct points
    std::vector<Point2> pts;
    for (unsigned long v = 0; v < 64; ++v) {
        pts.push_back(cantor_point(tw, Word::from_value(v, 6)));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            CHECK(dist(pts[i], pts[j]) > 1e-12);
        }
    }
    // degenerate maps: coded points accumulate on the graph {(f(x), x)}
    double band = 0.0;
    for (unsigned long v = 0; v < 64; ++v) {
        band = std::max(band, std::abs(pts[v].x - tw.map(0).f.f(pts[v].y)));
    }
    CHECK(band < 1e-7);
    // F sends the point coded w near the point coded by the successor
    std::vector<Piece> p4 = pieces(tw, 4);
    for (unsigned long v = 0; v < 16; ++v) {
        Word w = Word::from_value(v, 4);
        Point2 img = tw.map(0).apply(cantor_point(tw, w));
        Point2 tgt = cantor_point(tw, w.successor());
        CHECK(dist(img, tgt) < p4[w.successor().value()].diam);
    }
}

TEST_CASE("nondegenerate tower at b=0.3: tilt data and geometry") {
    const RenormTower& tw = tower03();
    REQUIRE(tw.complete());
    REQUIRE(tw.depth() == 3);
    for (const TowerLevel& lv : tw.levels) {
        CHECK(std::abs(lv.D(1, 0)) < 1e-12);  // upper triangular
        CHECK(lv.beta < 0.0);
        CHECK(lv.t < 0.0);
    }
    // |t_k| collapses super-exponentially
    CHECK(std::abs(tw.levels[1].t) < 0.5 * std::abs(tw.levels[0].t));
    CHECK(std::abs(tw.levels[2].t) < 0.5 * std::abs(tw.levels[1].t));
    // alpha_k approaches sigma^2 from below; within 25% for k >= 1
    for (int k = 1; k < 3; ++k) {
        CHECK(std::abs(tw.levels[k].alpha / (kSigma * kSigma) - 1.0) < 0.25);
    }
    CHECK(std::abs(tw.levels[2].alpha - kSigma * kSigma) <
          std::abs(tw.levels[1].alpha - kSigma * kSigma));

    // pieces stay pairwise disjoint and nested at every level
    for (int n = 1; n <= 3; ++n) {
        CHECK_NOTHROW(pieces(tw, n));
    }

    // the accumulated linear part matches the chain rule at the tip
    NonlinearPart S(tw, 0, 3);
    Eigen::Matrix2d chain = PsiMap(tw, Word::vs(3)).differential(tw.tip(3));
    CHECK((S.D() - chain).norm() / chain.norm() < 1e-8);
}

TEST_CASE("nonlinear part: factorization at the base point") {
    const RenormTower& tw = tower03();
    NonlinearPart S(tw, 0, 3);
    Point2 s0 = S({0.0, 0.0});
    CHECK(std::abs(s0.x) < 1e-10);
    CHECK(std::abs(s0.y) < 1e-10);
    // second coordinate vanishes identically (v-branches affine in y)
    for (Point2 z : {Point2{0.1, -0.2}, Point2{-0.3, 0.15}, Point2{0.2, 0.2}}) {
        CHECK(std::abs(S(z).y) < 1e-10);
    }
    // DS(0) = 0: central differences cancel the curvature term
    const double h = 1e-5;
    for (int k = 0; k < 2; ++k) {
        Point2 zp{k == 0 ? h : 0.0, k == 0 ? 0.0 : h};
        Point2 zm{-zp.x, -zp.y};
        CHECK(std::abs(S(zp).x - S(zm).x) / (2 * h) < 1e-7);
    }
}

TEST_CASE("nonlinear part: y-dependence is tiny, x-part is universal") {
    // a small-eps tower: |d_y S| << |d_x S|
    double a = locate_infinitely_renormalizable(0.05, 5);
    RenormTower tw = build_tower(normalize_henon(henon_family(a, 0.05)), 4);
    REQUIRE(tw.complete());
    NonlinearPart S(tw, 1, 4);
    const double h = 1e-4;
    double dx_max = 0.0, dy_max = 0.0;
    for (double z : {-0.2, -0.1, 0.05, 0.15}) {
        dx_max = std::max(
            dx_max, std::abs(S({z + h, 0.0}).x - S({z - h, 0.0}).x) / (2 * h));
        dy_max = std::max(
            dy_max, std::abs(S({z, h}).x - S({z, -h}).x) / (2 * h));
    }
    CHECK(dx_max > 1e-4);
    CHECK(dy_max / dx_max < 0.1);

    // id + S(., 0) approaches the universal limit diffeo v* (base point 1)
    const RenormTower& dtw = degenerate_tower();
    NonlinearPart S3(dtw, 1, 4);
    FixedPointResult fp = solve_fixed_point();
    UniversalDiffeos ud = universal_diffeos(presentation_function(fp));
    Interval vdom = ud.v_star.domain();
    double sup = 0.0;
    int used = 0;
    for (double z = -0.25; z <= 0.15; z += 0.02) {
        if (!vdom.contains(z + 1.0)) continue;
        ++used;
        double lhs = z + S3({z, 0.0}).x;
        double rhs = ud.v_star(z + 1.0) - 1.0;
        sup = std::max(sup, std::abs(lhs - rhs));
    }
    CHECK(used >= 10);
    CHECK(sup < 0.1);
}
