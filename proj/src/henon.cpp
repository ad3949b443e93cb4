#include "renormlab/henon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace renormlab {

const Interval kHenonDom{-1.50, 1.50};
const Box kHenonBox{{-1.32, 1.40}, {-1.32, 1.40}};

namespace {

AffineMap compose_affine(const AffineMap& outer, const AffineMap& inner) {
    return AffineMap{outer.scale * inner.scale,
                     outer.scale * inner.offset + outer.offset};
}

double sup_on_box(const ChebSeries2D& s, const Box& b, int nx = 33, int ny = 33) {
    double worst = 0.0;
    for (int i = 0; i < nx; ++i) {
        double x = b.x.lo + b.x.width() * i / (nx - 1);
        for (int j = 0; j < ny; ++j) {
            double y = b.y.lo + b.y.width() * j / (ny - 1);
            worst = std::max(worst, std::abs(s(x, y)));
        }
    }
    return worst;
}

}  // namespace

bool HenonLikeMap::contains(Point2 p, double tol) const {
    return box.x.contains(p.x, tol) && box.y.contains(p.y, tol);
}

double HenonLikeMap::phi(double x, double y) const {
    if (degenerate()) return f.f(x);
    return f.f(x) - eps(x, y);
}

double HenonLikeMap::phi_inverse(double x, double y) const {
    // Inverse of u -> phi(u, y) on the expanding branch right of c.
    const Interval fd = f.f.domain();
    double lo = f.c + 0.02 * (fd.hi - f.c);
    double hi = fd.hi;
    if (!degenerate()) {
        // keep (u, y) inside the eps box
        hi = std::min(hi, box.x.hi);
        hi = std::min(hi, box.y.hi);  // u later re-enters as a y-argument
    }
    hi -= 1e-12;
    // bracket by sampling (phi decreasing on the branch)
    auto val = [&](double u) { return phi(u, y); };
    double a = lo, b = hi, fa = val(a), fb = val(b);
    if ((fa - x) * (fb - x) > 0.0)
        throw MonotoneError("phi_inverse: target outside branch range at y=" +
                            std::to_string(y));
    // Newton with bisection fallback
    double u = 0.5 * (a + b);
    for (int it = 0; it < 80; ++it) {
        double g = val(u) - x;
        if (std::abs(g) < 1e-14 * std::max(1.0, std::abs(x))) break;
        if ((fa - x) * g < 0.0) {
            b = u;
        } else {
            a = u;
            fa = val(a);
        }
        double d = df(u);
        if (!degenerate()) d -= eps_dx(u, y);
        double step = (d != 0.0) ? g / d : 0.0;
        double un = u - step;
        if (step == 0.0 || un <= a || un >= b) un = 0.5 * (a + b);
        u = un;
    }
    return u;
}

Point2 HenonLikeMap::apply(Point2 p) const {
    if (!contains(p))
        throw DomainError("HenonLikeMap::apply: point outside the box");
    return {phi(p.x, p.y), p.x};
}

std::optional<Point2> HenonLikeMap::try_apply(Point2 p) const {
    if (!contains(p)) return std::nullopt;
    Point2 q{phi(p.x, p.y), p.x};
    if (!contains(q)) return std::nullopt;
    return q;
}

double HenonLikeMap::jacobian(Point2 p) const {
    if (degenerate()) return 0.0;
    return std::abs(eps_dy(p.x, p.y));
}

Eigen::Matrix2d HenonLikeMap::differential(Point2 p) const {
    Eigen::Matrix2d m;
    double ex = degenerate() ? 0.0 : eps_dx(p.x, p.y);
    double ey = degenerate() ? 0.0 : eps_dy(p.x, p.y);
    m << df(p.x) - ex, -ey, 1.0, 0.0;
    return m;
}

HenonLikeMap HenonLikeMap::from_parts(UnimodalMap f, ChebSeries2D eps, Box box) {
    HenonLikeMap F;
    F.f = std::move(f);
    F.eps = std::move(eps);
    F.box = box;
    F.eps_norm = sup_on_box(F.eps, box);
    F.df = F.f.f.derivative();
    if (F.eps_norm >= 1e-13) {
        F.eps_dx = F.eps.derivative_x();
        F.eps_dy = F.eps.derivative_y();
    } else {
        F.eps_dx = ChebSeries2D::zero(box);
        F.eps_dy = ChebSeries2D::zero(box);
    }
    return F;
}

HenonLikeMap HenonLikeMap::degenerate_from(const UnimodalMap& f, Box box) {
    return from_parts(f, ChebSeries2D::zero(box), box);
}

HenonLikeMap henon_family(double a, double b) {
    Interval dom{-2.1, 2.1};
    Box box{{-1.6, 1.6}, {-1.7, 1.7}};
    ChebSeries fs = ChebSeries::fit([a](double x) { return 1.0 - a * x * x; },
                                    dom, 8);
    UnimodalMap f = UnimodalMap::from_series(fs);
    ChebSeries2D eps = ChebSeries2D::fit([b](double, double y) { return b * y; },
                                         box, 2, 2);
    return HenonLikeMap::from_parts(f, eps, box);
}

HenonLikeMap normalize_henon(const HenonLikeMap& F) {
    double v1 = F.f.f(F.f.c);
    double v2 = F.f.f(v1);
    // A(v1)=1, A(v2)=-1
    double scale = 2.0 / (v1 - v2);
    AffineMap A{scale, 1.0 - scale * v1};
    AffineMap Ai = A.inverse();
    ChebSeries fn = ChebSeries::fit(
        [&](double x) { return A(F.f.f(Ai(x))); }, kHenonDom,
        std::max(16, F.f.f.degree()));
    UnimodalMap fu = UnimodalMap::from_series(fn, Interval{-1.0, 1.0});
    ChebSeries2D en =
        F.degenerate()
            ? ChebSeries2D::zero(kHenonBox)
            : ChebSeries2D::fit(
                  [&](double x, double y) {
                      return A.scale * F.eps(Ai(x), Ai(y));
                  },
                  kHenonBox, std::max(8, (int)F.eps.coeffs().rows() - 1),
                  std::max(8, (int)F.eps.coeffs().cols() - 1));
    return HenonLikeMap::from_parts(fu, en, kHenonBox);
}

// ---------------------------------------------------------------------------
// Fixed saddles.

std::pair<Saddle, Saddle> fixed_saddles(const HenonLikeMap& F) {
    // Fixed points satisfy y = x and phi(x, x) = x.
    Interval window{std::max(F.box.x.lo, F.box.y.lo),
                    std::min(F.box.x.hi, F.box.y.hi)};
    auto q = [&](double x) { return F.phi(x, x) - x; };
    const int n = 512;
    std::vector<double> roots;
    double prev = q(window.lo);
    for (int i = 1; i <= n; ++i) {
        double x = window.lo + window.width() * i / n;
        double cur = q(x);
        if (prev == 0.0 || prev * cur < 0.0) {
            // Newton refine
            double u = x - window.width() / (2.0 * n);
            for (int it = 0; it < 60; ++it) {
                double g = q(u);
                double d = F.df(u) - 1.0;
                if (!F.degenerate())
                    d -= F.eps_dx(u, u) + F.eps_dy(u, u);
                if (d == 0.0) break;
                double un = u - g / d;
                if (!window.contains(un, 1e-9)) break;
                u = un;
                if (std::abs(g) < 1e-14) break;
            }
            roots.push_back(u);
        }
        prev = cur;
    }
    if (roots.size() != 2)
        throw NonConvergenceError(
            "fixed_saddles: expected two fixed points in the box, found " +
            std::to_string(roots.size()));
    std::vector<Saddle> out;
    for (double x : roots) {
        Saddle s;
        s.p = {x, x};
        Eigen::Matrix2d m = F.differential(s.p);
        Eigen::EigenSolver<Eigen::Matrix2d> es(m);
        auto e0 = es.eigenvalues()[0], e1 = es.eigenvalues()[1];
        if (std::abs(e0.imag()) > 1e-9 || std::abs(e1.imag()) > 1e-9)
            throw NonConvergenceError("fixed_saddles: complex eigenvalues");
        s.eigs = {e0.real(), e1.real()};
        if (std::abs(s.eigs[0]) < std::abs(s.eigs[1]))
            std::swap(s.eigs[0], s.eigs[1]);
        s.regular = s.eigs[0] > 0.0;
        out.push_back(s);
    }
    if (out[0].regular == out[1].regular)
        throw NonConvergenceError(
            "fixed_saddles: could not classify regular vs flip saddle");
    if (!out[0].regular) std::swap(out[0], out[1]);
    return {out[0], out[1]};
}

// ---------------------------------------------------------------------------
// Pre-renormalization via the first-return composition.

namespace {

// First coordinate of H∘F²∘H⁻¹.
double G1_of(const HenonLikeMap& F, double x, double y) {
    double u = F.phi_inverse(x, y);
    double w = F.phi(x, u);
    return F.phi(w, x);
}

}  // namespace

namespace {

struct TraceGeometry {
    double c_g = 0.0;  // critical point (valley) of the trace
    Interval J;        // invariant horizontal interval of G
};

// Critical point of the trace and the invariant interval J such that
// G(J x I') stays in J x I', built directly from G1 samples: the lower
// endpoint is the valley minimum over the vertical fiber, the upper endpoint
// the image of the lower one, then a dense verification sweep.
TraceGeometry trace_geometry(const HenonLikeMap& F) {
    const double c = F.f.c;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto safe_g1 = [&](double x, double y) {
        try {
            return G1_of(F, x, y);
        } catch (const std::exception&) {
            return nan;
        }
    };
    TraceGeometry geo;
    // valley search on direct trace samples around the 1D critical point
    {
        double best = 1e300;
        bool found = false;
        for (int i = 0; i <= 180; ++i) {
            double x = c - 0.45 + 0.9 * i / 180.0;
            if (!F.degenerate() && !F.box.x.contains(x, 0.0)) continue;
            double v = safe_g1(x, c);
            if (std::isnan(v)) continue;
            if (v < best) {
                best = v;
                geo.c_g = x;
                found = true;
            }
        }
        if (!found)
            throw NotRenormalizableError("renormalize: trace not computable");
    }
    // local spectral refinement of the valley
    {
        Interval L{geo.c_g - 0.012, geo.c_g + 0.012};
        ChebSeries gl = ChebSeries::fit([&](double x) { return G1_of(F, x, c); },
                                        L, 16);
        ChebSeries dgl = gl.derivative();
        ChebSeries d2gl = dgl.derivative();
        for (int it = 0; it < 60; ++it) {
            double d = dgl(geo.c_g);
            if (std::abs(d) < 1e-13) break;
            double d2 = d2gl(geo.c_g);
            if (d2 <= 0.0) break;
            double cn = geo.c_g - d / d2;
            if (!L.contains(cn, 0.0)) break;
            geo.c_g = cn;
        }
        if (std::abs(dgl(geo.c_g)) > 1e-9)
            throw NotRenormalizableError("renormalize: trace critical point lost");
    }

    // dynamical interval from the trace's own critical orbit
    double t1 = safe_g1(geo.c_g, c);
    double t2 = std::isnan(t1) ? nan : safe_g1(t1, c);
    if (std::isnan(t1) || std::isnan(t2))
        throw NotRenormalizableError("renormalize: trace orbit escapes window");
    Interval J0 = sorted_interval(t1, t2);
    if (J0.width() < 1e-7)
        throw NotRenormalizableError("renormalize: degenerate 1D interval");
    // working bounds for the invariance construction
    Interval W = sorted_interval(std::min(J0.lo, geo.c_g), std::max(J0.hi, geo.c_g));
    W = W.padded(0.75 * W.width() + 0.04);
    if (!F.degenerate()) {
        W.lo = std::max(W.lo, F.box.x.lo + 1e-9);
        W.hi = std::min(W.hi, F.box.x.hi - 1e-9);
    }

    // vertical sampling window: what the rescaled frame will reference,
    // roughly J expanded about its midpoint, clipped to the box
    const int ny = F.degenerate() ? 1 : 17;
    auto fiber = [&](double x, Interval Y) {
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j < ny; ++j) {
            double y = ny == 1 ? c : Y.lo + Y.width() * j / (ny - 1);
            double v = safe_g1(x, y);
            if (std::isnan(v))
                throw NotRenormalizableError(
                    "renormalize: trace not computable on the candidate interval");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return Interval{lo, hi};
    };
    // vertical window: preimage of the standard box's vertical side under
    // the estimated total rescaling of the candidate interval, with a
    // generous fallback when the estimate degenerates
    auto vwindow = [&](double p, double q) {
        Interval fallback;
        {
            double mid = 0.5 * (p + q), hw = 0.9 * (q - p);
            fallback = Interval{std::max(mid - hw, F.box.y.lo),
                                std::min(mid + hw, F.box.y.hi)};
        }
        AffineMap s0 = AffineMap::between(Interval{p, q}, Interval{-1.0, 1.0}, -1);
        double v1r = safe_g1(geo.c_g, c);
        if (std::isnan(v1r)) return fallback;
        double v1 = s0(v1r);
        double v2r = safe_g1(s0.inverse()(v1), c);
        if (std::isnan(v2r)) return fallback;
        double v2 = s0(v2r);
        if (std::abs(v1 - v2) < 1e-8) return fallback;
        double ascale = 2.0 / (v1 - v2);
        AffineMap s = compose_affine(AffineMap{ascale, 1.0 - ascale * v1}, s0);
        if (std::abs(s.scale) < 1.2) return fallback;
        AffineMap si = s.inverse();
        Interval Y = sorted_interval(si(F.box.y.lo), si(F.box.y.hi));
        Y = Y.padded(0.05 * Y.width());
        Y.lo = std::max(Y.lo, F.box.y.lo);
        Y.hi = std::min(Y.hi, F.box.y.hi);
        if (Y.width() <= 0.0) return fallback;
        return Y;
    };
    const double pad = 1e-11;
    double q = J0.hi;
    double p = fiber(geo.c_g, vwindow(J0.lo, q)).lo - pad;
    const double cap = J0.width() * 1.6;
    for (int it = 0; it < 12; ++it) {
        Interval Y = vwindow(p, q);
        double qn = std::max(fiber(p, Y).hi, fiber(q, Y).hi) + pad;
        double pn = fiber(geo.c_g, Y).lo - pad;
        if (qn - J0.hi > cap || qn > W.hi)
            throw NotRenormalizableError(
                "renormalize: no invariant interval within the window");
        if (qn <= q + 1e-13 && pn >= p - 1e-13) {
            q = std::max(q, qn);
            break;
        }
        q = std::max(q, qn);
        p = std::min(p, pn);
    }
    // dense verification, expanding on small violations; the expansion map
    // is a contraction near a genuine invariant interval, so this settles
    // geometrically
    for (int sweep = 0; sweep < 40; ++sweep) {
        Interval Y = vwindow(p, q);
        double lo_need = 1e300, hi_need = -1e300;
        const int nx = 41;
        for (int i = 0; i < nx; ++i) {
            double x = p + (q - p) * i / (nx - 1);
            Interval r = fiber(x, Y);
            lo_need = std::min(lo_need, r.lo);
            hi_need = std::max(hi_need, r.hi);
        }
        if (lo_need >= p - 1e-12 && hi_need <= q + 1e-12) {
            geo.J = Interval{p, q};
            // the first iterate must leave J x I' (doubling combinatorics)
            double phimin = 1e300, phimax = -1e300;
            for (int i = 0; i <= 8; ++i) {
                double x = p + (q - p) * i / 8.0;
                for (int j = 0; j < ny; ++j) {
                    double y = ny == 1 ? c : Y.lo + Y.width() * j / (ny - 1);
                    double v = F.phi(x, y);
                    phimin = std::min(phimin, v);
                    phimax = std::max(phimax, v);
                }
            }
            if (phimin < q && phimax > p)
                throw NotRenormalizableError(
                    "renormalize: first iterate of J meets J");
            return geo;
        }
        // overshoot slightly so the geometric settling needs fewer sweeps
        if (lo_need < p) p = lo_need - 0.3 * (p - lo_need) - pad;
        if (hi_need > q) q = hi_need + 0.3 * (hi_need - q) + pad;
        if (q - p > J0.width() + 2.0 * cap || p < W.lo || q > W.hi)
            throw NotRenormalizableError(
                "renormalize: no invariant interval within the window");
    }
    throw NotRenormalizableError("renormalize: invariance not reached");
}

Prerenorm prerenorm_on(const HenonLikeMap& F, Interval V, double y_ref) {
    Prerenorm out;
    out.y_ref = y_ref;
    out.V = V;
    const int gdeg = std::max(56, F.f.f.degree() + 16);
    out.g = ChebSeries::fit([&](double x) { return G1_of(F, x, y_ref); },
                            out.V, gdeg);
    if (F.degenerate()) {
        out.delta = ChebSeries2D::zero(Box{out.V, out.V});
    } else {
        out.delta = ChebSeries2D::fit(
            [&](double x, double y) { return out.g(x) - G1_of(F, x, y); },
            Box{out.V, out.V}, 40, 16);
    }
    return out;
}

Interval fit_window(const HenonLikeMap& F, const Interval& J) {
    double hw = 0.85 * J.width();
    Interval V{J.mid() - hw, J.mid() + hw};
    if (!F.degenerate()) {
        V.lo = std::max(V.lo, F.box.x.lo + 1e-9);
        V.hi = std::min(V.hi, F.box.x.hi - 1e-9);
    }
    return V;
}

}  // namespace

Prerenorm prerenormalize(const HenonLikeMap& F) {
    TraceGeometry geo = trace_geometry(F);
    return prerenorm_on(F, fit_window(F, geo.J), F.f.c);
}

// ---------------------------------------------------------------------------
// Renormalization.

namespace {

// Total horizontal rescaling of one step: orientation-reversing s0: J -> I
// followed by the affine conjugacy normalizing the new 1D part (critical
// value 1, its image -1), computed from pointwise trace values.
AffineMap trace_scale(const HenonLikeMap& F, const TraceGeometry& geo) {
    if (geo.J.width() < 1e-7)
        throw NotRenormalizableError("renormalize: dynamical interval collapsed");
    AffineMap s0 = AffineMap::between(geo.J, Interval{-1.0, 1.0}, -1);
    AffineMap s0i = s0.inverse();
    const double y_ref = F.f.c;
    auto f1 = [&](double x) { return s0(G1_of(F, s0i(x), y_ref)); };
    double v1 = f1(s0(geo.c_g));
    double v2 = f1(v1);
    if (std::abs(v1 - v2) < 1e-10)
        throw NotRenormalizableError("renormalize: flat rescaled trace");
    double ascale = 2.0 / (v1 - v2);
    AffineMap A{ascale, 1.0 - ascale * v1};
    return compose_affine(A, s0);
}

}  // namespace

RenormStep renormalize(const HenonLikeMap& F) {
    RenormStep st;
    st.F = F;
    TraceGeometry geo = trace_geometry(F);
    const double c = geo.c_g;
    const Interval J = geo.J;
    st.s = trace_scale(F, geo);
    st.J = J;
    st.lambda = std::abs(st.s.scale);
    AffineMap si = st.s.inverse();

    // fit window: must cover the preimages of the standard frame
    Interval V = sorted_interval(si(kHenonDom.lo), si(kHenonDom.hi));
    if (!F.degenerate()) {
        V.lo = std::min(V.lo, std::min(si(kHenonBox.x.lo), si(kHenonBox.y.hi)));
        V.hi = std::max(V.hi, std::max(si(kHenonBox.x.hi), si(kHenonBox.y.lo)));
    }
    V = V.padded(1e-6 * V.width());
    if (!F.degenerate()) {
        V.lo = std::max(V.lo, F.box.x.lo + 1e-9);
        V.hi = std::min(V.hi, F.box.x.hi - 1e-9);
    }
    auto clampV = [&](double x) { return std::min(std::max(x, V.lo), V.hi); };
    st.pre = prerenorm_on(F, V, F.f.c);
    const ChebSeries& g = st.pre.g;

    ChebSeries fn = ChebSeries::fit(
        [&](double x) { return st.s(g(clampV(si(x)))); }, kHenonDom,
        std::max(48, g.degree()));
    UnimodalMap fu = UnimodalMap::from_series(fn, Interval{-1.0, 1.0});
    ChebSeries2D en =
        F.degenerate()
            ? ChebSeries2D::zero(kHenonBox)
            : ChebSeries2D::fit(
                  [&](double x, double y) {
                      return st.s.scale *
                             st.pre.delta(clampV(si(x)), clampV(si(y)));
                  },
                  kHenonBox, 40, 16);
    st.RF = HenonLikeMap::from_parts(fu, en, kHenonBox);
    return st;
}

Point2 RenormStep::H(Point2 p) const { return {F.phi(p.x, p.y), p.y}; }

Point2 RenormStep::H_inverse(Point2 p) const {
    return {F.phi_inverse(p.x, p.y), p.y};
}

Point2 RenormStep::Lambda(Point2 p) const { return {s(p.x), s(p.y)}; }

Point2 RenormStep::Lambda_inverse(Point2 p) const {
    AffineMap si = s.inverse();
    return {si(p.x), si(p.y)};
}

Point2 RenormStep::psi_v(Point2 p) const { return H_inverse(Lambda_inverse(p)); }

Point2 RenormStep::psi_c(Point2 p) const {
    AffineMap si = s.inverse();
    double u = si(p.x);
    double w = si(p.y);
    return {u, F.phi_inverse(u, w)};
}

Eigen::Matrix2d RenormStep::dpsi_v(Point2 p) const {
    AffineMap si = s.inverse();
    double u = si(p.x), w = si(p.y);
    double X = F.phi_inverse(u, w);
    double px = F.df(X) - (F.degenerate() ? 0.0 : F.eps_dx(X, w));
    double py = F.degenerate() ? 0.0 : -F.eps_dy(X, w);
    Eigen::Matrix2d m;
    m << si.scale / px, -si.scale * py / px, 0.0, si.scale;
    return m;
}

Eigen::Matrix2d RenormStep::dpsi_c(Point2 p) const {
    AffineMap si = s.inverse();
    double u = si(p.x), w = si(p.y);
    double X = F.phi_inverse(u, w);
    double px = F.df(X) - (F.degenerate() ? 0.0 : F.eps_dx(X, w));
    double py = F.degenerate() ? 0.0 : -F.eps_dy(X, w);
    Eigen::Matrix2d m;
    m << si.scale, 0.0, si.scale / px, -si.scale * py / px;
    return m;
}

// ---------------------------------------------------------------------------
// Class verification.

HenonReport verify_henon_like(const HenonLikeMap& F) {
    HenonReport r;
    r.eps_norm = F.eps_norm;
    r.jacobian_zero = F.degenerate();
    // unimodality of the 1D part on the box's horizontal side
    int sign_changes = 0;
    double prev = F.df(F.box.x.lo);
    for (int i = 1; i <= 512; ++i) {
        double x = F.box.x.lo + F.box.x.width() * i / 512.0;
        double cur = F.df(x);
        if (prev * cur < 0.0) ++sign_changes;
        prev = cur;
    }
    r.f_unimodal = (sign_changes == 1);
    // sign of d eps/dy over the box
    if (!F.degenerate()) {
        int sgn = 0;
        for (int i = 0; i <= 24 && r.dy_sign_constant; ++i) {
            double x = F.box.x.lo + F.box.x.width() * i / 24.0;
            for (int j = 0; j <= 24; ++j) {
                double y = F.box.y.lo + F.box.y.width() * j / 24.0;
                double v = F.eps_dy(x, y);
                int s = (v > 0.0) - (v < 0.0);
                if (s == 0) continue;
                if (sgn == 0) sgn = s;
                if (s != sgn) {
                    r.dy_sign_constant = false;
                    r.dy_sign_violation = {x, y};
                    break;
                }
            }
        }
        r.dy_sign = sgn;
    }
    // (x-derivative) guard on the expanding region U = {|x - c| >= 0.25}
    double kappa = 1e300, exsup = 0.0;
    for (int i = 0; i <= 256; ++i) {
        double x = F.box.x.lo + F.box.x.width() * i / 256.0;
        if (std::abs(x - F.f.c) < 0.25) continue;
        if (!F.f.f.domain().contains(x, 0.0)) continue;
        kappa = std::min(kappa, std::abs(F.df(x)));
        if (!F.degenerate()) {
            for (int j = 0; j <= 8; ++j) {
                double y = F.box.y.lo + F.box.y.width() * j / 8.0;
                exsup = std::max(exsup, std::abs(F.eps_dx(x, y)));
            }
        }
    }
    r.xder_margin = kappa / 2.0 - exsup;
    r.ok = r.f_unimodal && r.dy_sign_constant && r.xder_margin > 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Parameter location for the classical family.

namespace {

// Critical-point observable of the depth-times renormalized map: the
// normalized critical point sits at -1 exactly on the superstable analogue
// of period 2^(depth+1).
// Normalized critical point (plus one) of the depth-times renormalized map.
// The last level is evaluated through the rescaling alone so the value stays
// defined even when the critical point leaves [-1,1] (the z < 0 side of the
// root), where the map has no normalized unimodal representation.
double zeta(double a, double b, int depth) {
    HenonLikeMap Fnat = henon_family(a, b);
    if (depth == 0) {
        double c = Fnat.f.c;
        double v1 = Fnat.f.f(c), v2 = Fnat.f.f(v1);
        return 1.0 - 2.0 / (v1 - v2) * (v1 - c) + 1.0;
    }
    HenonLikeMap F = normalize_henon(Fnat);
    for (int k = 0; k + 1 < depth; ++k) F = renormalize(F).RF;
    TraceGeometry geo = trace_geometry(F);
    return trace_scale(F, geo)(geo.c_g) + 1.0;
}

}  // namespace

HenonCascade henon_cascade(double b, int m) {
    if (m < 2) throw std::invalid_argument("henon_cascade: need m >= 2");
    HenonCascade out;
    auto bisect = [&](double lo, double hi, double zlo, int depth) {
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            double z;
            try {
                z = zeta(mid, b, depth);
            } catch (const std::exception&) {
                // evaluation can only fail toward the previous root: the
                // last level's dynamical interval collapses there
                lo = mid;
                continue;
            }
            if ((z > 0.0) == (zlo > 0.0)) {
                lo = mid;
                zlo = z;
            } else {
                hi = mid;
            }
            if (hi - lo < 1e-13) break;
        }
        return 0.5 * (lo + hi);
    };

    // first root: scan a coarse grid, skipping parameters where the map is
    // not yet unimodal in the working frame
    {
        const double a0 = 0.7, a1 = 2.0, step = 0.02;
        bool has_prev = false, found = false;
        double prev_a = a0, prev_z = 0.0;
        for (double a = a0; a <= a1 && !found; a += step) {
            double z;
            try {
                z = zeta(a, b, 0);
            } catch (const std::exception&) {
                has_prev = false;
                continue;
            }
            if (has_prev && prev_z * z < 0.0) {
                out.a_super.push_back(bisect(prev_a, a, prev_z, 0));
                found = true;
            }
            prev_a = a;
            prev_z = z;
            has_prev = true;
        }
        if (!found)
            throw NonConvergenceError("henon_cascade: no first root in [0.7,2]");
    }
    // subsequent roots: march just past the previous one, skipping the thin
    // band where the last renormalization level is still collapsed
    double gap = 0.25;
    for (int k = 1; k < m; ++k) {
        double start = out.a_super.back();
        double step = gap / 16.0;
        bool has_prev = false, found = false;
        double prev_a = start, prev_z = 0.0;
        for (int i = 1; i <= 4000 && !found; ++i) {
            double a = start + i * step;
            if (a > 2.1) break;  // the 1D part escapes beyond this
            double z;
            try {
                z = zeta(a, b, k);
            } catch (const std::exception&) {
                // failed evaluations pepper the window at large eps; skip
                has_prev = false;
                continue;
            }
            // only upward sign changes are roots; the diagnostic also has a
            // pole below each root where it flips from +inf to -inf
            if (has_prev && prev_z < 0.0 && z > 0.0) {
                out.a_super.push_back(bisect(prev_a, a, prev_z, k));
                found = true;
            }
            prev_a = a;
            prev_z = z;
            has_prev = true;
        }
        if (!found)
            throw NonConvergenceError("henon_cascade: no root at depth " +
                                      std::to_string(k));
        gap = out.a_super[k] - out.a_super[k - 1];
    }
    if (out.a_super.size() >= 3) {
        int n = static_cast<int>(out.a_super.size());
        double d1 = out.a_super[n - 2] - out.a_super[n - 3];
        double d2 = out.a_super[n - 1] - out.a_super[n - 2];
        out.delta_estimate = d1 / d2;
        out.a_star_estimate =
            out.a_super[n - 1] + d2 / (out.delta_estimate - 1.0);
    } else {
        out.a_star_estimate = out.a_super.back();
    }
    return out;
}

double locate_infinitely_renormalizable(double b, int depth) {
    HenonCascade cas = henon_cascade(b, std::max(3, depth + 1));
    auto depth_ok = [&](double a) {
        try {
            HenonLikeMap F = normalize_henon(henon_family(a, b));
            for (int k = 0; k < depth; ++k) F = renormalize(F).RF;
            return true;
        } catch (const std::exception&) {
            return false;
        }
    };
    double a = cas.a_star_estimate;
    if (depth_ok(a)) return a;
    // fall back: bisect between the last root (safe side) and the estimate
    double lo = cas.a_super.back(), hi = a;
    if (!depth_ok(lo))
        throw NonConvergenceError(
            "locate_infinitely_renormalizable: depth unreachable");
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (depth_ok(mid)) lo = mid; else hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return lo;
}

}  // namespace renormlab
