#include "renormlab/unimodal.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace renormlab {

namespace {

// Nominal interval of normalized maps and the extended fit domain used so
// that renormalization and chart extraction never extrapolate a series.
const Interval kNominal{-1.0, 1.0};
const Interval kExtended{-1.25, 1.32};

double newton_critical(const ChebSeries& f, double seed, Interval window) {
    ChebSeries d1 = f.derivative();
    ChebSeries d2 = d1.derivative();
    double x = seed;
    for (int it = 0; it < 60; ++it) {
        double g = d1.eval_unclamped(x);
        double gg = d2.eval_unclamped(x);
        if (gg == 0.0) break;
        double xn = x - g / gg;
        xn = std::clamp(xn, window.lo, window.hi);
        if (std::abs(xn - x) < 1e-15 * std::max(1.0, std::abs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

double iterate(const ChebSeries& f, double x, int n) {
    for (int i = 0; i < n; ++i) x = f.eval_unclamped(x);
    return x;
}

bool intervals_disjoint(Interval a, Interval b, double tol) {
    return a.hi < b.lo - tol || b.hi < a.lo - tol;
}

}  // namespace

UnimodalMap UnimodalMap::from_series(const ChebSeries& f,
                                     std::optional<Interval> reference) {
    Interval ref = reference.value_or(f.domain());
    ChebSeries df = f.derivative();
    const int n = 512;
    int sign_changes = 0;
    double change_at = ref.mid();
    double prev = df.eval_unclamped(ref.lo + ref.width() * 0.5 / n);
    for (int i = 1; i < n; ++i) {
        double x = ref.lo + ref.width() * (i + 0.5) / n;
        double v = df.eval_unclamped(x);
        if (prev > 0.0 && v < 0.0) {
            ++sign_changes;
            change_at = x;
        } else if (prev < 0.0 && v > 0.0) {
            ++sign_changes;
            change_at = x;
        }
        if (v != 0.0) prev = v;
    }
    if (sign_changes != 1)
        throw NotUnimodalError("from_series: expected exactly one sign change "
                               "of f', found " + std::to_string(sign_changes));
    UnimodalMap um;
    um.f = f;
    um.c = newton_critical(f, change_at, ref);
    double fc = f.eval_unclamped(um.c);
    double ffc = f.eval_unclamped(fc);
    um.dyn = sorted_interval(ffc, fc);
    um.normalized = std::abs(fc - 1.0) < 1e-9 &&
                    std::abs(f.eval_unclamped(1.0) + 1.0) < 1e-9;
    return um;
}

double critical_point(const UnimodalMap& f) { return f.c; }

UnimodalMap normalize(const UnimodalMap& um) {
    const double fc = um.f.eval_unclamped(um.c);
    const double ffc = um.f.eval_unclamped(fc);
    if (std::abs(fc - ffc) < 1e-14)
        throw NotUnimodalError("normalize: degenerate dynamical interval");
    // A(f(c)) = 1, A(f^2(c)) = -1; handles peak and valley orientation.
    const double p = 2.0 / (fc - ffc);
    const double q = 1.0 - p * fc;
    AffineMap A{p, q};
    AffineMap Ai = A.inverse();
    Interval image = sorted_interval(A(um.f.domain().lo), A(um.f.domain().hi));
    Interval newdom{std::max(image.lo + 1e-12, kExtended.lo),
                    std::min(image.hi - 1e-12, kExtended.hi)};
    ChebSeries g = ChebSeries::fit(
        [&](double x) { return A(um.f.eval_unclamped(Ai(x))); }, newdom,
        std::max(um.f.degree(), 8), um.f.tail_tol());
    return UnimodalMap::from_series(g, kNominal);
}

UnimodalMap quadratic_map(double a) {
    ChebSeries f = ChebSeries::fit([a](double x) { return 1.0 - a * x * x; },
                                   Interval{-1.7, 1.7}, 8);
    return UnimodalMap::from_series(f, Interval{-1.7, 1.7});
}

UnimodalMap normalized_quadratic(double a) {
    return normalize(quadratic_map(a));
}

namespace {

Renormalizability check_renormalizable(const UnimodalMap& um, Interval J) {
    Renormalizability r;
    r.J = J;
    const ChebSeries& f = um.f;
    const double tol = 1e-10;
    if (J.width() < 1e-13) {
        r.why = "degenerate interval";
        return r;
    }
    if (!(J.lo < um.c && um.c < J.hi) &&
        !(f.domain().contains(um.c))) {
        r.why = "critical point escapes";
        return r;
    }
    // f(J): hull of endpoint images and the critical value when c is inside.
    double fl = f.eval_unclamped(J.lo), fh = f.eval_unclamped(J.hi);
    Interval fJ = sorted_interval(fl, fh);
    if (J.contains(um.c)) {
        double fc = f.eval_unclamped(um.c);
        fJ.lo = std::min(fJ.lo, fc);
        fJ.hi = std::max(fJ.hi, fc);
    }
    if (!intervals_disjoint(J, fJ, tol)) {
        r.why = "J meets f(J)";
        return r;
    }
    // f^2(J) subset J, sampled at endpoints + midpoint (+ critical point).
    for (double x : {J.lo, J.mid(), J.hi, um.c}) {
        if (!J.contains(x)) continue;
        double y = f.eval_unclamped(f.eval_unclamped(x));
        if (!J.contains(y, tol)) {
            r.why = "f^2(J) escapes J";
            return r;
        }
    }
    r.ok = true;
    return r;
}

}  // namespace

Renormalizability renormalizable_c(const UnimodalMap& um) {
    double c2 = iterate(um.f, um.c, 2);
    double c4 = iterate(um.f, um.c, 4);
    return check_renormalizable(um, sorted_interval(c4, c2));
}

Renormalizability renormalizable_v(const UnimodalMap& um) {
    double c1 = iterate(um.f, um.c, 1);
    double c3 = iterate(um.f, um.c, 3);
    return check_renormalizable(um, sorted_interval(c3, c1));
}

namespace {

Renorm1D renorm_around(const UnimodalMap& um, const Renormalizability& rn,
                       const char* opname) {
    if (!rn.ok)
        throw NotRenormalizableError(std::string(opname) + ": " + rn.why);
    const Interval J = rn.J;
    const ChebSeries& f = um.f;
    const Interval dom = f.domain();
    AffineMap s = AffineMap::between(J, kNominal, -1);
    AffineMap si = s.inverse();
    const double slack = 1e-9;
    // Extend the output domain as far as the input fit domain allows.
    double e_hi = std::min(kExtended.hi - 1.0,
                           2.0 * (J.lo - dom.lo - slack) / J.width());
    double e_lo = std::min(-kExtended.lo - 1.0,
                           2.0 * (dom.hi - J.hi - slack) / J.width());
    e_hi = std::max(e_hi, 0.0);
    e_lo = std::max(e_lo, 0.0);
    Renorm1D out;
    out.J = J;
    out.s = s;
    out.lambda = um.dyn.width() / J.width();
    for (int attempt = 0; attempt < 5; ++attempt) {
        Interval target{-1.0 - e_lo, 1.0 + e_hi};
        bool ok = true;
        auto sampler = [&](double x) {
            double u = si(x);
            double v = f.eval_unclamped(u);
            if (!dom.contains(v, slack)) {
                ok = false;
                return 0.0;
            }
            return s(f.eval_unclamped(v));
        };
        ChebSeries Rf =
            ChebSeries::fit(sampler, target, std::max(f.degree(), 16));
        if (!ok) {
            e_hi *= 0.5;
            e_lo *= 0.5;
            continue;
        }
        UnimodalMap um2 = UnimodalMap::from_series(Rf, kNominal);
        double drift = std::max(std::abs(Rf.eval_unclamped(um2.c) - 1.0),
                                std::abs(Rf.eval_unclamped(1.0) + 1.0));
        if (um.normalized && drift > 1e-9) um2 = normalize(um2);
        out.Rf = um2;
        return out;
    }
    throw NotRenormalizableError(std::string(opname) +
                                 ": rescaled iterate escapes fit domain");
}

}  // namespace

Renorm1D renorm_c(const UnimodalMap& um) {
    return renorm_around(um, renormalizable_c(um), "renorm_c");
}

Renorm1D renorm_v(const UnimodalMap& um) {
    return renorm_around(um, renormalizable_v(um), "renorm_v");
}

// ---------------------------------------------------------------------------
// Fixed point solver: Newton on the even-symmetry chart f(x) = h((x-c)^2).

namespace {

struct Chart {
    int h_degree;
    int f_degree;
    double r_max;
    Interval f_dom;

    ChebSeries build_f(const ChebSeries& h, double c) const {
        return ChebSeries::fit(
            [&](double x) { return h.eval_unclamped((x - c) * (x - c)); },
            f_dom, f_degree);
    }

    ChebSeries extract_h(const ChebSeries& f, double c) const {
        const Interval dom = f.domain();
        return ChebSeries::fit(
            [&](double r) {
                double sq = std::sqrt(std::max(r, 0.0));
                double xr = c + sq;
                if (xr <= dom.hi + 1e-9) return f.eval_unclamped(xr);
                return f.eval_unclamped(c - sq);
            },
            Interval{0.0, r_max}, h_degree);
    }
};

// Residual of R_c f - f at collocation nodes plus the two normalization
// conditions. Throws only on catastrophic inputs; renormalizability loss is
// reported as a large residual so damped Newton can back off.
Eigen::VectorXd chart_residual(const Chart& chart, const Eigen::VectorXd& u,
                               const std::vector<double>& nodes) {
    const int nh = chart.h_degree + 1;
    std::vector<double> hc(u.data(), u.data() + nh);
    const double c = u[nh];
    ChebSeries h(hc, Interval{0.0, chart.r_max});
    ChebSeries f = chart.build_f(h, c);
    Eigen::VectorXd r(nodes.size() + 2);
    double c2 = iterate(f, c, 2), c4 = iterate(f, c, 4);
    Interval J = sorted_interval(c4, c2);
    if (!(J.width() > 1e-6) || !(J.lo < c && c < J.hi)) {
        r.setConstant(1e3);
        return r;
    }
    AffineMap s = AffineMap::between(J, kNominal, -1);
    AffineMap si = s.inverse();
    for (size_t i = 0; i < nodes.size(); ++i) {
        double x = nodes[i];
        double y = s(f.eval_unclamped(f.eval_unclamped(si(x))));
        r[i] = y - f.eval_unclamped(x);
    }
    r[nodes.size()] = h.eval_unclamped(0.0) - 1.0;
    r[nodes.size() + 1] = h.eval_unclamped((1.0 - c) * (1.0 - c)) + 1.0;
    return r;
}

}  // namespace

FixedPointResult solve_fixed_point(int degree, double tol) {
    if (degree < 20)
        throw std::invalid_argument("solve_fixed_point: degree must be >= 20");

    // Initial guess: 5-fold renormalization of the cascade-located quadratic.
    CascadeResult cascade = cascade_locate(9);
    UnimodalMap seed = normalized_quadratic(cascade.a_star_estimate);
    for (int i = 0; i < 5; ++i) seed = renorm_c(seed).Rf;

    Chart chart;
    chart.h_degree = degree / 2;
    chart.f_degree = degree;
    chart.f_dom = Interval{kExtended.lo, 1.30};
    chart.r_max = (1.30 - seed.c) * (1.30 - seed.c);

    ChebSeries h0 = chart.extract_h(seed.f, seed.c);
    const int nh = chart.h_degree + 1;
    Eigen::VectorXd u(nh + 1);
    for (int i = 0; i < nh; ++i) u[i] = h0.coeffs()[i];
    u[nh] = seed.c;

    std::vector<double> nodes;
    for (int j = 0; j <= chart.h_degree + 2; ++j)
        nodes.push_back(std::cos(M_PI * j / (chart.h_degree + 2)));

    const double fd_step = 1e-7;
    Eigen::VectorXd r = chart_residual(chart, u, nodes);
    int iterations = 0;
    for (; iterations < 60; ++iterations) {
        if (r.lpNorm<Eigen::Infinity>() < tol) break;
        Eigen::MatrixXd Jm(r.size(), u.size());
        for (int j = 0; j < u.size(); ++j) {
            Eigen::VectorXd up = u;
            up[j] += fd_step;
            Jm.col(j) = (chart_residual(chart, up, nodes) - r) / fd_step;
        }
        Eigen::VectorXd step = Jm.colPivHouseholderQr().solve(-r);
        double damp = 1.0;
        Eigen::VectorXd u_next;
        Eigen::VectorXd r_next;
        for (int half = 0; half < 12; ++half) {
            u_next = u + damp * step;
            r_next = chart_residual(chart, u_next, nodes);
            if (r_next.norm() < r.norm()) break;
            damp *= 0.5;
        }
        u = u_next;
        r = r_next;
    }
    if (r.lpNorm<Eigen::Infinity>() >= tol)
        throw NonConvergenceError(
            "solve_fixed_point: Newton stalled, residual " +
            std::to_string(r.lpNorm<Eigen::Infinity>()));

    FixedPointResult fp;
    std::vector<double> hc(u.data(), u.data() + nh);
    fp.h = ChebSeries(hc, Interval{0.0, chart.r_max});
    fp.c = u[nh];
    ChebSeries f = chart.build_f(fp.h, fp.c);
    fp.f_star = UnimodalMap::from_series(f, kNominal);
    Renormalizability rn = renormalizable_c(fp.f_star);
    if (!rn.ok)
        throw NonConvergenceError("solve_fixed_point: result not renormalizable");
    fp.J_c = rn.J;
    fp.J_v = sorted_interval(iterate(f, fp.c, 3), iterate(f, fp.c, 1));
    fp.lambda = 2.0 / fp.J_c.width();
    fp.sigma = 1.0 / fp.lambda;
    fp.newton_iterations = iterations;
    // Residual reported on a dense probe grid, directly from the operator.
    AffineMap s = AffineMap::between(fp.J_c, kNominal, -1);
    AffineMap si = s.inverse();
    double sup = 0.0;
    for (int i = 0; i <= 512; ++i) {
        double x = -1.0 + 2.0 * i / 512;
        double y = s(f.eval_unclamped(f.eval_unclamped(si(x))));
        sup = std::max(sup, std::abs(y - f.eval_unclamped(x)));
    }
    fp.residual = sup;
    return fp;
}

std::vector<std::complex<double>> operator_spectrum(const FixedPointResult& fp,
                                                    int dim) {
    if (dim < 2 || dim > fp.h.degree())
        throw std::invalid_argument("operator_spectrum: bad chart dimension");
    const double step = 1e-6;
    if (step < 1e3 * std::numeric_limits<double>::epsilon())
        throw std::runtime_error("operator_spectrum: differencing step underflow");

    Chart chart;
    chart.h_degree = fp.h.degree();
    chart.f_degree = fp.f_star.f.degree();
    chart.f_dom = fp.f_star.f.domain();
    chart.r_max = fp.h.domain().hi;

    // Coordinates u = h-coefficients 1..dim on the chart of normalized maps:
    // h_0 is pinned by h(0)=1 (so f(c)=1) and c is re-solved from
    // h((1-c)^2)=-1 (so f(1)=-1).  This keeps every differencing direction
    // tangent to the normalized space; otherwise the finite-difference matrix
    // picks up spurious expanding modes from the affine-conjugacy directions.
    auto image = [&](const Eigen::VectorXd& u) {
        std::vector<double> hc = fp.h.coeffs();
        for (int i = 0; i < dim; ++i) hc[i + 1] = u[i];
        // h(0) lives at the left end of the r-domain, where T_k = (-1)^k.
        double at0 = 0.0;
        for (std::size_t k = 1; k < hc.size(); ++k)
            at0 += (k % 2 == 0 ? hc[k] : -hc[k]);
        hc[0] = 1.0 - at0;
        ChebSeries h(hc, fp.h.domain());
        ChebSeries dh = h.derivative();
        double c = fp.c;
        for (int it = 0; it < 50; ++it) {
            double r = (1.0 - c) * (1.0 - c);
            double g = h(r) + 1.0;
            if (std::abs(g) < 1e-14) break;
            c -= g / (-2.0 * (1.0 - c) * dh(r));
        }
        ChebSeries f = chart.build_f(h, c);
        UnimodalMap um = UnimodalMap::from_series(f, kNominal);
        UnimodalMap rf = renorm_c(um).Rf;
        ChebSeries h2 = chart.extract_h(rf.f, rf.c);
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = h2.coeffs()[i + 1];
        return v;
    };

    Eigen::VectorXd u0(dim);
    for (int i = 0; i < dim; ++i) u0[i] = fp.h.coeffs()[i + 1];
    Eigen::VectorXd base = image(u0);
    Eigen::MatrixXd D(dim, dim);
    for (int j = 0; j < dim; ++j) {
        Eigen::VectorXd up = u0;
        up[j] += step;
        D.col(j) = (image(up) - base) / step;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(D);
    std::vector<std::complex<double>> eigs(dim);
    for (int i = 0; i < dim; ++i) eigs[i] = es.eigenvalues()[i];
    std::sort(eigs.begin(), eigs.end(),
              [](auto a, auto b) { return std::abs(a) > std::abs(b); });
    return eigs;
}

// ---------------------------------------------------------------------------
// Presentation function and universal diffeomorphisms.

ChebSeries presentation_function(const FixedPointResult& fp) {
    const ChebSeries& f = fp.f_star.f;
    AffineMap s = AffineMap::between(fp.J_c, kNominal, -1);
    AffineMap si = s.inverse();
    // Branch of f*^{-1} carrying J_c* back onto J_v*: f* is monotone
    // (decreasing) right of the critical point.
    Interval bracket{fp.c + 0.05 * (f.domain().hi - fp.c),
                     std::min(1.28, f.domain().hi - 1e-9)};
    Interval gdom{-1.06, 1.06};
    return ChebSeries::fit(
        [&](double y) { return invert_monotone(f, si(y), bracket); }, gdom,
        std::max(40, f.degree()));
}

UniversalDiffeos universal_diffeos(const ChebSeries& g_star, int n_iter) {
    UniversalDiffeos out;
    const Interval dom = g_star.domain();
    ChebSeries T = ChebSeries::identity(dom);
    const int grid = 257;
    auto sup_diff = [&](const ChebSeries& A, const ChebSeries& B) {
        double m = 0.0;
        for (int i = 0; i < grid; ++i) {
            double x = -1.0 + 2.0 * i / (grid - 1);
            m = std::max(m, std::abs(A.eval_unclamped(x) - B.eval_unclamped(x)));
        }
        return m;
    };
    for (int n = 0; n < n_iter; ++n) {
        ChebSeries Tg = compose(T, g_star, std::max(40, T.degree()));
        Interval image =
            sorted_interval(Tg.eval_unclamped(-1.0), Tg.eval_unclamped(1.0));
        AffineMap A = AffineMap::between(image, kNominal, 1);
        std::vector<double> cs = Tg.coeffs();
        for (auto& v : cs) v *= A.scale;
        cs[0] += A.offset;
        ChebSeries Tn(cs, dom, Tg.tail_tol());
        double d = sup_diff(Tn, T);
        out.step_sups.push_back(d);
        T = Tn;
        out.iterations = n + 1;
        if (d < 1e-11) break;
    }
    if (out.step_sups.size() >= 3 && out.step_sups.back() > 1e-11 &&
        out.step_sups.back() > 0.9 * out.step_sups[out.step_sups.size() - 2])
        throw NonConvergenceError("universal_diffeos: no contraction detected");
    out.u_star = T;
    out.u_prime_1 = T.derivative().eval_unclamped(1.0);
    // v* = (u* - 1)/u*'(1) + 1 is an affine post-map; transform coefficients.
    std::vector<double> cs = T.coeffs();
    for (auto& v : cs) v /= out.u_prime_1;
    cs[0] += 1.0 - 1.0 / out.u_prime_1;
    out.v_star = ChebSeries(cs, dom, T.tail_tol());
    return out;
}

ChebSeries universal_a(const FixedPointResult& fp, const ChebSeries& v_star) {
    ChebSeries dv = v_star.derivative();
    const ChebSeries& f = fp.f_star.f;
    const int n = 128;
    for (int i = 0; i <= n; ++i) {
        double x = -1.02 + 2.04 * i / n;
        if (std::abs(dv.eval_unclamped(x)) < 1e-10)
            throw SingularityError("universal_a: v*' vanishes");
    }
    return ChebSeries::fit(
        [&](double x) {
            return dv.eval_unclamped(x) / dv.eval_unclamped(f.eval_unclamped(x));
        },
        Interval{-1.02, 1.02}, std::max(40, v_star.degree()));
}

// ---------------------------------------------------------------------------
// Cascade of superstable parameters for x -> 1 - a x^2.

namespace {

double quad_orbit(double a, int n) {
    double x = 0.0;
    for (int i = 0; i < n; ++i) x = 1.0 - a * x * x;
    return x;
}

}  // namespace

CascadeResult cascade_locate(int m) {
    if (m < 4) throw std::invalid_argument("cascade_locate: m must be >= 4");
    CascadeResult out;
    out.a_super.push_back(1.0);  // superstable period 2: f_a^2(0)=0 at a=1
    double prev_gap = 0.25;
    for (int k = 2; k <= m; ++k) {
        const int period = 1 << k;
        double a0 = out.a_super.back();
        // Bracket the next root of a -> f_a^{2^k}(0) above the previous
        // superstable parameter, stepping by a fraction of the last gap.
        double step = prev_gap / 16.0;
        double lo = a0 + step;
        double flo = quad_orbit(lo, period);
        double hi = lo;
        double fhi = flo;
        bool found = false;
        for (int i = 0; i < 4000; ++i) {
            hi = lo + step;
            fhi = quad_orbit(hi, period);
            if (flo == 0.0 || flo * fhi < 0.0) {
                found = true;
                break;
            }
            lo = hi;
            flo = fhi;
        }
        if (!found)
            throw NonConvergenceError(
                "cascade_locate: bracket failure near a = " + std::to_string(lo));
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = quad_orbit(mid, period);
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            if (flo * fm < 0.0) {
                hi = mid;
                fhi = fm;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        double a_k = 0.5 * (lo + hi);
        prev_gap = a_k - a0;
        out.a_super.push_back(a_k);
    }
    const auto& a = out.a_super;
    size_t n = a.size();
    out.delta_estimate =
        (a[n - 2] - a[n - 3]) / (a[n - 1] - a[n - 2]);
    out.a_star_estimate =
        a[n - 1] + (a[n - 1] - a[n - 2]) / (out.delta_estimate - 1.0);
    return out;
}

std::vector<double> quadratic_interval_ratios(double a, int n_max) {
    // Pure orbit arithmetic: J(n) endpoints are f^{2^n}(0) and f^{2^{n+1}}(0).
    std::vector<double> orbit(1, 0.0);
    const long long need = 1LL << (n_max + 1);
    double x = 0.0;
    for (long long i = 1; i <= need; ++i) {
        x = 1.0 - a * x * x;
        orbit.push_back(x);
    }
    std::vector<double> widths;
    for (int n = 0; n <= n_max; ++n) {
        double e1 = orbit[1LL << n];
        double e2 = orbit[1LL << (n + 1)];
        widths.push_back(std::abs(e1 - e2));
    }
    std::vector<double> ratios;
    for (int n = 0; n + 1 <= n_max; ++n)
        ratios.push_back(widths[n] / widths[n + 1]);
    return ratios;
}

Interval critical_interval(const UnimodalMap& um, int n) {
    double e1 = iterate(um.f, um.c, 1 << n);
    double e2 = iterate(um.f, um.c, 1 << (n + 1));
    return sorted_interval(e1, e2);
}

Interval critical_value_interval(const UnimodalMap& um, int n) {
    Interval J = critical_interval(um, n);
    double fl = um.f.eval_unclamped(J.lo), fh = um.f.eval_unclamped(J.hi);
    Interval out = sorted_interval(fl, fh);
    if (J.contains(um.c)) {
        double fc = um.f.eval_unclamped(um.c);
        out.lo = std::min(out.lo, fc);
        out.hi = std::max(out.hi, fc);
    }
    return out;
}

}  // namespace renormlab
