#include "renormlab/universality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace renormlab {

namespace {

double pow_2n(double b, int n) {  // b^{2^n} in log space
    return std::exp(std::ldexp(1.0, n) * std::log(b));
}

/// Tip chart at level n: the nonlinear factor of Psi^n_0 together with the
/// tip-translated level-n dynamics.
struct TipChart {
    const RenormTower* tw;
    int n;
    NonlinearPart S;
    Point2 tau_n;

    TipChart(const RenormTower& tower, int level)
        : tw(&tower), n(level), S(tower, 0, level), tau_n(tower.tip(level)) {}

    Point2 forward(Point2 z) const { return {z.x + S(z).x, z.y}; }

    Point2 inverse(Point2 p) const {
        double x = p.x;  // Newton on x + S_x(x, y) = p.x
        for (int it = 0; it < 40; ++it) {
            double g = x + S({x, p.y}).x - p.x;
            if (std::abs(g) < 1e-13) return {x, p.y};
            const double h = 1e-6;
            double d = (S({x + h, p.y}).x - S({x - h, p.y}).x) / (2 * h) + 1.0;
            x -= g / d;
        }
        throw std::runtime_error("tip chart inversion did not converge");
    }

    Point2 dynamics(Point2 z) const {  // tip-translated F_n
        Point2 q = tw->map(n).apply({z.x + tau_n.x, z.y + tau_n.y});
        return {q.x - tau_n.x, q.y - tau_n.y};
    }
};

/// v* in tip-translated coordinates: fixes 0 with derivative 1.
double v_shift(const UniversalDiffeos& ud, double x) {
    return ud.v_star(x + 1.0) - 1.0;
}

double v_shift_inv(const UniversalDiffeos& ud, double x) {
    return invert_monotone(ud.v_star, x + 1.0, ud.v_star.domain()) - 1.0;
}

struct GridStats {
    double deviation = 0.0;
    int excluded = 0;
    int total = 0;
    double ydep = 0.0;
};

/// Sup distance between two chart maps over a fixed 17x9 grid on the unit
/// box; failures of either map exclude the point.
template <typename MapA, typename MapB>
GridStats grid_compare(const MapA& ma, const MapB& mb) {
    GridStats st;
    for (int i = 0; i < 17; ++i) {
        double x = -1.0 + 2.0 * i / 16.0;
        double p2_lo = 1e300, p2_hi = -1e300;
        for (int j = 0; j < 9; ++j) {
            double y = -1.0 + 2.0 * j / 8.0;
            ++st.total;
            try {
                Point2 pa = ma({x, y});
                Point2 pb = mb({x, y});
                st.deviation = std::max(
                    {st.deviation, std::abs(pa.x - pb.x), std::abs(pa.y - pb.y)});
                p2_lo = std::min(p2_lo, pa.y);
                p2_hi = std::max(p2_hi, pa.y);
            } catch (const std::exception&) {
                ++st.excluded;
            }
        }
        if (p2_hi >= p2_lo) st.ydep = std::max(st.ydep, p2_hi - p2_lo);
    }
    return st;
}

}  // namespace

UniversalityReport universality_check(const RenormTower& tower,
                                      const ChebSeries& a, double b) {
    UniversalityReport rep;
    if (tower.map(0).degenerate() || b <= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    Interval dom = a.domain();
    for (int n = 0; n < tower.depth(); ++n) {
        UniversalityRow row;
        row.n = n;
        const HenonLikeMap& Fn = tower.map(n);
        row.eps_norm = Fn.eps_norm;
        double scale = pow_2n(b, n);
        row.valid = scale > 1e-9;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < 33; ++i) {
            double x = dom.lo + dom.width() * (0.01 + 0.98 * i / 32.0);
            if (!Fn.box.x.contains(x)) continue;
            double r = Fn.eps_dy(x, 0.0) / (scale * a(x));
            row.xs.push_back(x);
            row.ratios.push_back(r);
            row.max_dev = std::max(row.max_dev, std::abs(r - 1.0));
            sum += r;
            sum2 += r * r;
        }
        if (!row.ratios.empty()) {
            double m = sum / row.ratios.size();
            row.variance = sum2 / row.ratios.size() - m * m;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

std::vector<TiltRow> tilt_asymptotics(const RenormTower& tower, double b) {
    std::vector<TiltRow> rows;
    for (int k = 0; k < tower.depth(); ++k) {
        TiltRow row;
        row.k = k;
        row.t = tower.levels[static_cast<std::size_t>(k)].t;
        if (b > 0.0) {
            double scale = pow_2n(b, k);
            row.valid = scale > 1e-12;
            row.ratio = row.t / (-scale);
        }
        rows.push_back(row);
    }
    return rows;
}

CurvatureFit curvature_aF(const RenormTower& tower) {
    if (tower.depth() < 2) {
        throw std::out_of_range("curvature_aF: tower too shallow");
    }
    CurvatureFit fit;
    for (int n = 2; n <= tower.depth(); ++n) {
        NonlinearPart S(tower, 0, n);
        const int m = 21;
        Eigen::MatrixXd A(m, 2);
        Eigen::VectorXd w(m);
        for (int i = 0; i < m; ++i) {
            double y = -0.5 + 1.0 * i / (m - 1);
            A(i, 0) = y * y;
            A(i, 1) = y * y * y;
            w(i) = S({0.0, y}).x;
        }
        Eigen::Vector2d coef = A.colPivHouseholderQr().solve(w);
        fit.a_n.push_back(coef[0]);
        fit.cubic_n.push_back(coef[1]);
        if (n == tower.depth()) {
            fit.residual = (A * coef - w).cwiseAbs().maxCoeff();
        }
    }
    fit.a_F = fit.a_n.back();
    if (fit.a_n.size() >= 2) {
        fit.convergence =
            std::abs(fit.a_n.back() - fit.a_n[fit.a_n.size() - 2]);
    }
    fit.unstable = fit.residual > 1e-4;
    return fit;
}

RescaledRenormReport affine_renorm(const RenormTower& tower, int n,
                                   double a_F, const FixedPointResult& fp,
                                   const UniversalDiffeos& ud) {
    TipChart chart(tower, n);
    auto raff = [&](Point2 p) {
        return chart.forward(chart.dynamics(chart.inverse(p)));
    };
    double cstar = fp.c;
    auto limit = [&](Point2 p) {
        double v = v_shift_inv(ud, p.x - a_F * p.y * p.y);
        if (!fp.f_star.f.domain().contains(v + 1.0)) {
            throw DomainError("outside the universal domain");
        }
        Point2 u{fp.f_star.f(v + 1.0) - 1.0, v + 1.0 - cstar};
        return Point2{v_shift(ud, u.x) + a_F * u.y * u.y, u.y};
    };
    GridStats st = grid_compare(raff, limit);
    return {n, st.deviation, st.excluded, st.total, st.ydep};
}

RescaledRenormReport quadratic_renorm(const RenormTower& tower, int n,
                                      double a_F, const FixedPointResult& fp,
                                      const UniversalDiffeos& ud) {
    TipChart chart(tower, n);
    auto rqd = [&](Point2 p) {
        Point2 q{p.x + a_F * p.y * p.y, p.y};  // Q^{-1}
        Point2 r = chart.forward(chart.dynamics(chart.inverse(q)));
        return Point2{r.x - a_F * r.y * r.y, r.y};  // Q
    };
    // first coordinate: l ∘ f^v ∘ l^{-1} with f^v = u ∘ f ∘ u^{-1}, the
    // fixed point of renormalization around the critical value
    double up1 = ud.u_prime_1;
    double cstar = fp.c;
    auto limit = [&](Point2 p) {
        double lx = up1 * p.x + 1.0;  // l^{-1}
        double w = invert_monotone(ud.u_star, lx, ud.u_star.domain());
        if (!fp.f_star.f.domain().contains(w)) {
            throw DomainError("outside the universal domain");
        }
        double x1 = (ud.u_star(fp.f_star.f(w)) - 1.0) / up1;
        return Point2{x1, v_shift_inv(ud, p.x) + 1.0 - cstar};
    };
    GridStats st = grid_compare(rqd, limit);
    return {n, st.deviation, st.excluded, st.total, st.ydep};
}

SuperexpCheck superexp_check(const RenormTower& tower) {
    SuperexpCheck chk;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int m = 0;
    for (int n = 0; n <= tower.depth(); ++n) {
        double norm = tower.map(n).eps_norm;
        chk.norms.push_back(norm);
        if (norm <= 1e-14) continue;
        double x = std::ldexp(1.0, n);  // 2^n
        double y = std::log(norm);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++m;
    }
    chk.levels_used = m;
    if (m == 0) {
        chk.degenerate = true;
        return chk;
    }
    if (m >= 2) {
        double vx = sxx - sx * sx / m;
        double vy = syy - sy * sy / m;
        double cov = sxy - sx * sy / m;
        chk.slope = cov / vx;
        chk.r2 = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
    }
    return chk;
}

}  // namespace renormlab
