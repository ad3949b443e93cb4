#include "renormlab/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>

namespace renormlab {

namespace {

// the universal 1D scaling factor of period doubling
constexpr double kSigma = 0.3995352805;

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double seg_point_dist(Point2 a, Point2 b, Point2 p) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return dist({a.x + t * vx, a.y + t * vy}, p);
}

double seg_seg_dist(Point2 a, Point2 b, Point2 c, Point2 d) {
    return std::min({seg_point_dist(a, b, c), seg_point_dist(a, b, d),
                     seg_point_dist(c, d, a), seg_point_dist(c, d, b)});
}

/// Distance between two convex polygons (they are known to be disjoint),
/// minimized over all edge pairs.
double hull_distance(const std::vector<Point2>& A,
                     const std::vector<Point2>& B) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < A.size(); ++i) {
        Point2 a = A[i], b = A[(i + 1) % A.size()];
        for (std::size_t j = 0; j < B.size(); ++j) {
            Point2 c = B[j], d = B[(j + 1) % B.size()];
            best = std::min(best, seg_seg_dist(a, b, c, d));
        }
    }
    return best;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t m = xs.size();
    for (std::size_t i = 0; i < m; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    LineFit f;
    double vx = sxx - sx * sx / m;
    double vy = syy - sy * sy / m;
    double cov = sxy - sx * sy / m;
    if (vx > 0.0) {
        f.slope = cov / vx;
        f.intercept = (sy - f.slope * sx) / m;
        f.r2 = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
    }
    return f;
}

/// Preimage of the tip under the level-m map (the odometer predecessor of
/// the tip on the attractor).  The second component of F pins x = tip.y;
/// the height sits on the expanding branch with f(y) ~ x, refined by Newton
/// on f(x) - eps(x, y) = tip.x whenever the perturbation is resolvable.
Point2 critical_marker(const RenormTower& tower, int m) {
    const HenonLikeMap& F = tower.map(m);
    Point2 tip = tower.tip(m);
    double x = tip.y;
    double y = F.phi_inverse(x, tip.y);
    if (F.eps_norm < 1e-12) return {x, y};
    double target = F.f.f(x) - tip.x;
    for (int it = 0; it < 60; ++it) {
        double g = F.eps(x, y) - target;
        if (std::abs(g) < 1e-15 * std::max(1.0, std::abs(target))) break;
        double d = F.eps_dy(x, y);
        if (std::abs(d) < 1e-300) break;
        y -= g / d;
        y = std::clamp(y, F.box.y.lo, F.box.y.hi);
    }
    return {x, y};
}

/// The all-v chart chain from level n down to level k.
Point2 push_down(const RenormTower& tower, int k, int n, Point2 z) {
    for (int j = n - 1; j >= k; --j) {
        z = tower.levels[static_cast<std::size_t>(j)].step.psi_v(z);
    }
    return z;
}

/// Horizontal offset pi_1(c^n_k) - pi_1(tip_k) of the pushed marker.
double marker_offset(const RenormTower& tower, int k, int n) {
    Point2 c = push_down(tower, k, n, critical_marker(tower, n));
    return c.x - tower.tip(k).x;
}

/// Ordered closed boundary loop of a piece, per_side samples per box side.
std::vector<Point2> piece_loop(const RenormTower& tower, const Word& w,
                               int per_side) {
    PsiMap psi(tower, w);
    const Box B = tower.map(static_cast<int>(w.length())).box;
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(4 * per_side));
    for (int i = 0; i < per_side; ++i) {
        double t = static_cast<double>(i) / per_side;
        pts.push_back(psi({B.x.lo + t * B.x.width(), B.y.lo}));
    }
    for (int i = 0; i < per_side; ++i) {
        double t = static_cast<double>(i) / per_side;
        pts.push_back(psi({B.x.hi, B.y.lo + t * B.y.width()}));
    }
    for (int i = 0; i < per_side; ++i) {
        double t = static_cast<double>(i) / per_side;
        pts.push_back(psi({B.x.hi - t * B.x.width(), B.y.hi}));
    }
    for (int i = 0; i < per_side; ++i) {
        double t = static_cast<double>(i) / per_side;
        pts.push_back(psi({B.x.lo, B.y.hi - t * B.y.width()}));
    }
    return pts;
}

/// Distance between two closed boundary loops: min over sample pairs,
/// sharpened by one local optimization step (segment-segment distance
/// around the minimizing pair), which removes most of the sampling bias.
double loop_gap(const std::vector<Point2>& A, const std::vector<Point2>& B) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        for (std::size_t j = 0; j < B.size(); ++j) {
            double d = dist(A[i], B[j]);
            if (d < best) {
                best = d;
                ia = i;
                ib = j;
            }
        }
    }
    std::size_t na = A.size(), nb = B.size();
    for (std::size_t di = 0; di <= 1; ++di) {
        for (std::size_t dj = 0; dj <= 1; ++dj) {
            Point2 a0 = A[(ia + na - di) % na], a1 = A[(ia + na - di + 1) % na];
            Point2 b0 = B[(ib + nb - dj) % nb], b1 = B[(ib + nb - dj + 1) % nb];
            best = std::min(best, seg_seg_dist(a0, a1, b0, b1));
        }
    }
    return best;
}

/// gap/diam of the children of one parent word, via boundary sampling only
/// (no global piece table); used at levels too deep for the full report.
double child_ratio(const RenormTower& tower, const Word& parent) {
    std::size_t m = parent.length();
    unsigned long pv = parent.value();
    std::vector<Point2> bv =
        piece_loop(tower, Word::from_value(pv, m + 1), 64);
    std::vector<Point2> bc =
        piece_loop(tower, Word::from_value(pv + (1ul << m), m + 1), 64);
    double gap = loop_gap(bv, bc);
    std::vector<Point2> all = piece_loop(tower, parent, 32);
    double diam = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            diam = std::max(diam, dist(all[i], all[j]));
        }
    }
    return diam > 0.0 ? gap / diam : 0.0;
}

int thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 4 : static_cast<int>(hw);
    if (const char* env = std::getenv("RENORMLAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) n = v;
    }
    return n;
}

/// Which side of the doubling-cascade accumulation parameter (a, b) lies
/// on, read off from the failure mode of the renormalization chain:
/// before accumulation the rescaled 1D part loses unimodality, past it the
/// trace orbit escapes.  0 means the chain reached the cap.
int cascade_side(double a, double b, int cap) {
    HenonLikeMap F = normalize_henon(henon_family(a, b));
    for (int k = 0; k < cap; ++k) {
        try {
            F = renormalize(F).RF;
        } catch (const NotUnimodalError&) {
            return -1;
        } catch (const NotRenormalizableError&) {
            return +1;
        }
    }
    return 0;
}

/// Locate the depth-times-renormalizable parameter near a seed by bisection
/// on the failure side.  Much cheaper than the cascade-based locator when a
/// good seed is available.
double refine_parameter(double b, double seed, double radius, int depth) {
    double lo = seed - radius, hi = seed + radius;
    for (int expand = 0;; ++expand) {
        int slo = cascade_side(lo, b, depth);
        if (slo == 0) return lo;
        int shi = cascade_side(hi, b, depth);
        if (shi == 0) return hi;
        if (slo < 0 && shi > 0) break;
        if (expand >= 5) {
            throw NonConvergenceError(
                "refine_parameter: no bracket around the seed");
        }
        radius *= 3.0;
        lo = seed - radius;
        hi = seed + radius;
    }
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
        double mid = 0.5 * (lo + hi);
        int s = cascade_side(mid, b, depth);
        if (s == 0) return mid;
        (s < 0 ? lo : hi) = mid;
    }
    throw NonConvergenceError(
        "refine_parameter: bisection exhausted without reaching the depth");
}

double estimate_b(const RenormTower& tower) {
    if (tower.b > 0.0) return tower.b;
    MeasureEstimate est =
        average_jacobian(tower, std::min(tower.depth(), 6));
    return est.degenerate ? 0.0 : est.b;
}

}  // namespace

GeometryReport geometry_stats(const RenormTower& tower, int max_level) {
    if (max_level < 1 || max_level > tower.depth()) {
        throw std::out_of_range("geometry_stats: level exceeds tower depth");
    }
    GeometryReport rep;
    std::vector<std::vector<Piece>> levels;
    for (int n = 0; n <= max_level; ++n) levels.push_back(pieces(tower, n));

    rep.min_gap_ratio = std::numeric_limits<double>::infinity();
    std::vector<double> log_gap, log_diam;
    for (int n = 0; n + 1 <= max_level; ++n) {
        unsigned long count = 1ul << n;
        for (unsigned long v = 0; v < count; ++v) {
            const Piece& parent = levels[static_cast<std::size_t>(n)][v];
            const Piece& cv = levels[static_cast<std::size_t>(n) + 1][v];
            const Piece& cc =
                levels[static_cast<std::size_t>(n) + 1][v + count];
            GapRow row;
            row.n = n;
            row.word = parent.word;
            row.diam = parent.diam;
            row.gap = hull_distance(cv.hull, cc.hull);
            row.ratio = row.diam > 0.0 ? row.gap / row.diam : 0.0;
            rep.min_gap_ratio = std::min(rep.min_gap_ratio, row.ratio);
            if (n >= 1 && row.gap > 0.0 && row.diam > 0.0) {
                log_gap.push_back(std::log(row.gap));
                log_diam.push_back(std::log(row.diam));
            }
            rep.rows.push_back(std::move(row));
        }
    }
    if (log_gap.size() >= 2) {
        rep.holder_alpha_fit = fit_line(log_gap, log_diam).slope;
    }
    if (max_level >= 2) {
        for (const Piece& p : levels[2]) {
            rep.diam_scale_C =
                std::max(rep.diam_scale_C, p.diam / (kSigma * kSigma));
        }
    }
    return rep;
}

std::vector<Point2> cantor_sample(const RenormTower& tower, int n) {
    std::vector<Point2> pts;
    unsigned long count = 1ul << n;
    pts.reserve(count);
    for (unsigned long v = 0; v < count; ++v) {
        pts.push_back(cantor_point(tower, Word::from_value(v, n)));
    }
    return pts;
}

double hausdorff_estimate(const std::vector<Point2>& points,
                          const std::vector<double>& scales) {
    if (points.empty()) throw std::invalid_argument("hausdorff: no points");
    std::vector<double> xs, ys;
    for (double s : scales) {
        std::unordered_set<long long> boxes;
        for (const Point2& p : points) {
            long long ix = static_cast<long long>(std::floor(p.x / s));
            long long iy = static_cast<long long>(std::floor(p.y / s));
            boxes.insert((ix << 28) ^ (iy & ((1ll << 28) - 1)));
        }
        std::size_t n = boxes.size();
        if (n <= 1 || n >= 0.8 * static_cast<double>(points.size())) {
            continue;  // scale too coarse or saturated by the sample size
        }
        xs.push_back(std::log(1.0 / s));
        ys.push_back(std::log(static_cast<double>(n)));
    }
    if (xs.size() < 4) {
        throw std::invalid_argument("hausdorff: fewer than 4 usable scales");
    }
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (*hi - *lo < std::log(10.0) * 0.999) {
        throw std::invalid_argument("hausdorff: scales span less than a decade");
    }
    return fit_line(xs, ys).slope;
}

NonrigidityResult nonrigidity_probe(const RenormTower& towerF,
                                    const RenormTower& towerG) {
    NonrigidityResult res;
    res.b_F = estimate_b(towerF);
    res.b_G = estimate_b(towerG);
    if (res.b_F <= 0.0 || res.b_G <= 0.0 || res.b_F < res.b_G) {
        throw std::invalid_argument("nonrigidity_probe: need b_F >= b_G > 0");
    }
    res.alpha_bound = 0.5 * (1.0 + std::log(res.b_F) / std::log(res.b_G));

    auto pair_dist = [](const RenormTower& tw, int k, int n) {
        const HenonLikeMap& Fk = tw.map(k);
        Point2 w = Fk.apply(tw.tip(k));
        Point2 z = Fk.apply(push_down(tw, k, n, critical_marker(tw, k + n)));
        PsiMap psi(tw, Word::vs(static_cast<std::size_t>(k)));
        return dist(psi(w), psi(z));
    };

    res.alpha_empirical = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 2; ++k) {
        NonrigidityPair pr;
        pr.k = k;
        double scale = std::exp(std::ldexp(1.0, k) * std::log(res.b_G));
        pr.n = static_cast<int>(std::floor(std::log(scale) / std::log(kSigma)));
        if (pr.n < 1 || k + pr.n > std::min(towerF.depth(), towerG.depth())) {
            res.pairs.push_back(pr);
            continue;
        }
        pr.dist_F = pair_dist(towerF, k, pr.n);
        pr.dist_G = pair_dist(towerG, k, pr.n);
        if (pr.dist_F > 1e-11 && pr.dist_G > 1e-11 && pr.dist_G < 1.0) {
            pr.alpha = std::log(pr.dist_F) / std::log(pr.dist_G);
            pr.valid = true;
            res.alpha_empirical = std::min(res.alpha_empirical, pr.alpha);
        }
        res.pairs.push_back(pr);
    }

    // scaling of the small-Jacobian distances with n at fixed k = 1
    std::vector<double> ns, lds;
    for (int n = 3; n <= 7 && 1 + n <= towerG.depth(); ++n) {
        double d = pair_dist(towerG, 1, n);
        if (d <= 1e-13) continue;
        res.tilde_scaling.emplace_back(n, d);
        ns.push_back(static_cast<double>(n) * std::log(kSigma));
        lds.push_back(std::log(d));
    }
    if (ns.size() >= 3) res.tilde_slope = fit_line(ns, lds).slope;
    return res;
}

ScanResult unbounded_geometry_scan(double b_lo, double b_hi,
                                   int points_per_k) {
    if (!(0.0 < b_lo && b_lo < b_hi) || points_per_k < 4) {
        throw std::invalid_argument("unbounded_geometry_scan: bad range");
    }
    ScanResult res;
    const int max_depth = 12;

    // Scale level per the b^{2^k} ~ sigma^{n-k} balance.  The tilt and the
    // quadratic contributions to the horizontal offset oppose each other at
    // odd n-k in our orientation convention (each level's rescaling is
    // orientation-reversing), so zeros of the offset live on odd segments;
    // the +1.5 shift centers the balance point within the segment.
    auto scale_level = [&](double b, int k) {
        double target =
            std::ldexp(1.0, k) * std::log(b) / std::log(kSigma);
        int off = 2 * static_cast<int>(std::lround((target + 0.5) / 2.0)) + 1;
        off = std::clamp(off, 3, 9);
        return k + off;
    };

    // seed model for the located parameter a*(b), from three anchors of the
    // classical family (a grows roughly affinely in b at desk scale)
    auto seed_a = [](double b) {
        // anchors: a*(0.05)=1.4785, a*(0.1)=1.5615, a*(0.3)=1.9516
        return 1.40125631 + 1.48647441 * b + 1.16053128 * b * b;
    };

    // One refined parameter and tower per b, shared by both k.
    auto evaluate = [&](double b, int k, double seed, double radius,
                        ScanSample& out) {
        out.b = b;
        out.valid = false;
        try {
            out.a = refine_parameter(b, seed, radius, max_depth);
            RenormTower tw = build_tower(
                normalize_henon(henon_family(out.a, b)), max_depth);
            if (!tw.complete()) return;
            out.n = scale_level(b, k);
            out.offset = marker_offset(tw, k, out.n);
            out.valid = true;
        } catch (const std::exception&) {
        }
    };

    // grid pass, parallel over b points; both k share the located a
    std::vector<ScanSample> grid(
        static_cast<std::size_t>(points_per_k) * 2);
    std::vector<double> bs;
    for (int i = 0; i < points_per_k; ++i) {
        double t = static_cast<double>(i) / (points_per_k - 1);
        bs.push_back(b_lo * std::pow(b_hi / b_lo, t));
    }
    std::atomic<std::size_t> next{0};
    int workers = std::min(thread_budget(), static_cast<int>(bs.size()));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < bs.size();
                 i = next.fetch_add(1)) {
                double b = bs[i];
                ScanSample& s1 = grid[i];
                ScanSample& s2 = grid[i + bs.size()];
                s1.b = s2.b = b;
                try {
                    double a = refine_parameter(b, seed_a(b), 2e-3, max_depth);
                    RenormTower tw = build_tower(
                        normalize_henon(henon_family(a, b)), max_depth);
                    if (!tw.complete()) continue;
                    for (int k = 1; k <= 2; ++k) {
                        ScanSample& s = k == 1 ? s1 : s2;
                        s.a = a;
                        s.n = scale_level(b, k);
                        s.offset = marker_offset(tw, k, s.n);
                        s.valid = true;
                    }
                } catch (const std::exception&) {
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    res.samples = grid;

    // drive sign changes inside fixed-n segments to the alignment target
    // by bracketed secant (Illinois) iteration in b
    std::vector<ScanCrossing> found;
    std::mutex mx;
    auto bisect_segment = [&](int k, std::size_t i) {
        const ScanSample &L = grid[i], &R = grid[i + 1];
        double blo = L.b, bhi = R.b, flo = L.offset, fhi = R.offset;
        double alo = L.a, ahi = R.a;
        ScanSample mid = L;
        for (int it = 0; it < 40; ++it) {
            double bm = (blo * fhi - bhi * flo) / (fhi - flo);
            double margin = 0.05 * (bhi - blo);
            bm = std::clamp(bm, blo + margin, bhi - margin);
            double seed = alo + (ahi - alo) * (bm - blo) /
                                    std::max(bhi - blo, 1e-300);
            evaluate(bm, k, seed, std::max(2.0 * std::abs(ahi - alo), 1e-7),
                     mid);
            if (!mid.valid || mid.n != L.n) return;
            if (std::abs(mid.offset) < 1e-9) break;
            if ((mid.offset > 0.0) == (flo > 0.0)) {
                blo = bm;
                flo = mid.offset;
                alo = mid.a;
                fhi *= 0.5;  // Illinois damping of the stale end
            } else {
                bhi = bm;
                fhi = mid.offset;
                ahi = mid.a;
                flo *= 0.5;  // Illinois damping of the stale end
            }
        }
        if (std::abs(mid.offset) >= 1e-9) return;
        ScanCrossing cr;
        cr.k = k;
        cr.n = mid.n;
        cr.b = mid.b;
        cr.a = mid.a;
        cr.residual = std::abs(mid.offset);
        // child gap/diam statistics at the collapse level
        RenormTower tw = build_tower(
            normalize_henon(henon_family(cr.a, cr.b)), max_depth);
        std::vector<double> ratios;
        unsigned long count = 1ul << (cr.n - 1);
        unsigned long stride = std::max(count / 1024ul, 1ul);
        for (unsigned long v = 0; v < count; v += stride) {
            ratios.push_back(child_ratio(
                tw, Word::from_value(v, static_cast<std::size_t>(cr.n - 1))));
        }
        std::sort(ratios.begin(), ratios.end());
        cr.min_ratio = ratios.front();
        cr.median_ratio = ratios[ratios.size() / 2];
        std::lock_guard<std::mutex> lock(mx);
        found.push_back(cr);
    };

    std::vector<std::pair<int, std::size_t>> segs;
    for (int k = 1; k <= 2; ++k) {
        std::size_t base = static_cast<std::size_t>(k - 1) * points_per_k;
        for (std::size_t i = base; i + 1 < base + points_per_k; ++i) {
            if (!grid[i].valid || !grid[i + 1].valid) continue;
            if (grid[i].n != grid[i + 1].n) continue;
            if ((grid[i].offset > 0.0) != (grid[i + 1].offset > 0.0)) {
                segs.emplace_back(k, i);
            }
        }
    }
    std::atomic<std::size_t> snext{0};
    std::vector<std::thread> spool;
    int sworkers = std::min(workers, static_cast<int>(segs.size()));
    for (int w = 0; w < sworkers; ++w) {
        spool.emplace_back([&] {
            for (std::size_t i = snext.fetch_add(1); i < segs.size();
                 i = snext.fetch_add(1)) {
                bisect_segment(segs[i].first, segs[i].second);
            }
        });
    }
    for (auto& th : spool) th.join();
    std::sort(found.begin(), found.end(),
              [](const ScanCrossing& a, const ScanCrossing& b) {
                  return a.k != b.k ? a.k < b.k : a.b < b.b;
              });
    res.crossings = std::move(found);
    return res;
}

}  // namespace renormlab
