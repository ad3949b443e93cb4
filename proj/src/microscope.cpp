#include "renormlab/microscope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace renormlab {

namespace {

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point2 branch_apply(const RenormStep& st, int letter, Point2 p) {
    return letter == 0 ? st.psi_v(p) : st.psi_c(p);
}

Eigen::Matrix2d branch_diff(const RenormStep& st, int letter, Point2 p) {
    return letter == 0 ? st.dpsi_v(p) : st.dpsi_c(p);
}

/// Critical-value point (f(c), c); the exact tip for degenerate maps and an
/// O(|eps|)-accurate estimate otherwise.
Point2 tip_seed(const HenonLikeMap& F) { return {F.f.f(F.f.c), F.f.c}; }

// --- convex geometry helpers (hulls are small; plain O(n log n)) ---

double cross(Point2 o, Point2 a, Point2 b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point2 a, Point2 b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Point2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;  // counterclockwise
}

/// Signed separation of two convex polygons along the outward normals of
/// both; positive means disjoint by that margin.
double hull_separation(const std::vector<Piece>& ps, std::size_t ia,
                       std::size_t ib) {
    const std::vector<Point2>&A = ps[ia].hull, &B = ps[ib].hull;
    double best = -1e300;
    auto axes_of = [&](const std::vector<Point2>& P,
                       const std::vector<Point2>& Q) {
        std::size_t n = P.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point2 a = P[i], b = P[(i + 1) % n];
            double nx = b.y - a.y, ny = a.x - b.x;  // outward for ccw
            double len = std::hypot(nx, ny);
            if (len < 1e-300) continue;
            nx /= len;
            ny /= len;
            double pmax = -1e300;
            for (Point2 p : P) pmax = std::max(pmax, nx * p.x + ny * p.y);
            double qmin = 1e300;
            for (Point2 q : Q) qmin = std::min(qmin, nx * q.x + ny * q.y);
            best = std::max(best, qmin - pmax);
        }
    };
    axes_of(A, B);
    axes_of(B, A);
    return best;
}

/// Inside test against a sampled convex hull.  The hull vertices sample a
/// smooth boundary, so a point of the true region may fall outside a chord
/// by up to the sagitta ~ kappa/8 * chord^2; each edge gets that much slack.
bool point_in_hull(const std::vector<Point2>& hull, Point2 p, double tol) {
    std::size_t n = hull.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        Point2 a = hull[i], b = hull[(i + 1) % n];
        double len = dist(a, b);
        if (len < 1e-300) continue;
        double slack = std::max(tol, len * len);
        if (cross(a, b, p) < -slack * len) return false;
    }
    return true;
}

}  // namespace

// ----------------------------------------------------------------- Word

unsigned long Word::value() const {
    unsigned long v = 0;
    for (std::size_t k = letters.size(); k-- > 0;) {
        v = 2 * v + static_cast<unsigned long>(letters[k]);
    }
    return v;
}

Word Word::successor() const {
    Word w = *this;
    for (auto& d : w.letters) {
        if (d == 0) {
            d = 1;
            return w;  // no carry
        }
        d = 0;  // carry into the next digit
    }
    return w;  // wrapped around: c^n + 1 = v^n
}

std::string Word::str() const {
    std::string s;
    for (int d : letters) s += (d == 0 ? 'v' : 'c');
    return s;
}

Word Word::vs(std::size_t n) {
    Word w;
    w.letters.assign(n, 0);
    return w;
}

Word Word::from_value(unsigned long value, std::size_t length) {
    Word w = vs(length);
    for (std::size_t k = 0; k < length; ++k) {
        w.letters[k] = static_cast<int>((value >> k) & 1u);
    }
    return w;
}

// ---------------------------------------------------------------- tower

const HenonLikeMap& RenormTower::map(int k) const {
    if (k < 0 || k > depth()) throw std::out_of_range("tower level");
    return k == depth() ? top : levels[static_cast<std::size_t>(k)].step.F;
}

Point2 RenormTower::tip(int k) const {
    if (k < 0 || k > depth()) throw std::out_of_range("tower level");
    return k == depth() ? tau_top : levels[static_cast<std::size_t>(k)].tau;
}

RenormTower build_tower(const HenonLikeMap& F, int depth) {
    RenormTower tw;
    tw.requested_depth = depth;
    HenonLikeMap cur = F;
    for (int k = 0; k < depth; ++k) {
        TowerLevel lv;
        try {
            lv.step = renormalize(cur);
        } catch (const std::exception& e) {
            tw.failure =
                "renormalization failed at level " + std::to_string(k) + ": " +
                e.what();
            tw.top = cur;
            tw.tau_top = tip_seed(cur);
            break;
        }
        cur = lv.step.RF;
        tw.levels.push_back(std::move(lv));
    }
    if (tw.failure.empty()) {
        tw.top = cur;
        tw.tau_top = tip_seed(cur);
    }

    // Tips: pull the top seed down through the v-branches; the recursion
    // contracts the seed error at every level.
    Point2 tau = tw.tau_top;
    for (std::size_t k = tw.levels.size(); k-- > 0;) {
        TowerLevel& lv = tw.levels[k];
        Point2 pulled = lv.step.psi_v(tau);
        lv.tau = pulled;
        lv.tip_residual = dist(pulled, tip_seed(lv.step.F));
        tau = pulled;
    }

    // Differentials of the tip-translated v-branches and tilt data.
    for (std::size_t k = 0; k < tw.levels.size(); ++k) {
        TowerLevel& lv = tw.levels[k];
        Point2 tau_next =
            (k + 1 < tw.levels.size()) ? tw.levels[k + 1].tau : tw.tau_top;
        lv.D = lv.step.dpsi_v(tau_next);
        lv.alpha = lv.D(0, 0);
        lv.beta = lv.D(1, 1);
        lv.t = lv.D(0, 1) / lv.D(1, 1);
    }
    return tw;
}

// --------------------------------------------------------------- PsiMap

PsiMap::PsiMap(const RenormTower& tower, Word w) : tower_(&tower), w_(std::move(w)) {
    if (static_cast<int>(w_.length()) > tower.depth()) {
        throw std::out_of_range("word longer than tower depth");
    }
}

Point2 PsiMap::operator()(Point2 p) const {
    for (std::size_t k = w_.length(); k-- > 0;) {
        p = branch_apply(tower_->levels[k].step, w_.letters[k], p);
    }
    return p;
}

Eigen::Matrix2d PsiMap::differential(Point2 p) const {
    std::size_t n = w_.length();
    std::vector<Point2> pts(n + 1);
    pts[n] = p;
    for (std::size_t k = n; k-- > 0;) {
        pts[k] = branch_apply(tower_->levels[k].step, w_.letters[k], pts[k + 1]);
    }
    Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
    for (std::size_t k = 0; k < n; ++k) {
        M = M * branch_diff(tower_->levels[k].step, w_.letters[k], pts[k + 1]);
    }
    return M;
}

PsiMap psi_word(const RenormTower& tower, const Word& w) {
    return PsiMap(tower, w);
}

// --------------------------------------------------------------- pieces

std::vector<Piece> pieces(const RenormTower& tower, int n) {
    if (n < 0 || n > tower.depth()) {
        throw std::out_of_range("piece level exceeds tower depth");
    }
    const Box& B = tower.map(n).box;
    // boundary samples of the level-n box, 32 per side
    std::vector<Point2> border;
    const int m = 32;
    for (int i = 0; i < m; ++i) {
        double tx = B.x.lo + B.x.width() * i / m;
        double ty = B.y.lo + B.y.width() * i / m;
        border.push_back({tx, B.y.lo});
        border.push_back({B.x.hi, ty});
        border.push_back({B.x.lo + B.x.width() * (i + 1) / m, B.y.hi});
        border.push_back({B.x.lo, B.y.lo + B.y.width() * (i + 1) / m});
    }

    std::vector<Piece> out;
    unsigned long count = 1ul << n;
    for (unsigned long v = 0; v < count; ++v) {
        Piece pc;
        pc.word = Word::from_value(v, static_cast<std::size_t>(n));
        PsiMap psi(tower, pc.word);
        for (Point2 q : border) pc.boundary.push_back(psi(q));
        pc.hull = convex_hull(pc.boundary);
        double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
        for (Point2 q : pc.boundary) {
            xlo = std::min(xlo, q.x);
            xhi = std::max(xhi, q.x);
            ylo = std::min(ylo, q.y);
            yhi = std::max(yhi, q.y);
        }
        pc.bbox = {{xlo, xhi}, {ylo, yhi}};
        for (std::size_t i = 0; i < pc.hull.size(); ++i) {
            for (std::size_t j = i + 1; j < pc.hull.size(); ++j) {
                pc.diam = std::max(pc.diam, dist(pc.hull[i], pc.hull[j]));
            }
        }
        out.push_back(std::move(pc));
    }

    // pairwise disjointness of the convex hulls
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            if (hull_separation(out, i, j) < 1e-11) {
                throw GeometryViolation("pieces " + out[i].word.str() +
                                        " and " + out[j].word.str() +
                                        " overlap at level " +
                                        std::to_string(n));
            }
        }
    }
    // nesting inside the parent pieces
    if (n >= 2) {
        std::vector<Piece> parents = pieces(tower, n - 1);
        for (const Piece& pc : out) {
            Word parent = pc.word;
            parent.letters.pop_back();
            const Piece& pp = parents[parent.value()];
            for (Point2 q : pc.boundary) {
                // the hull of finitely many boundary samples cuts curved
                // corners slightly, so allow a size-relative margin
                double tol = std::max(1e-9, 1e-4 * pp.diam);
                if (!point_in_hull(pp.hull, q, tol)) {
                    throw GeometryViolation("piece " + pc.word.str() +
                                            " escapes its parent " +
                                            parent.str());
                }
            }
        }
    }
    return out;
}

// --------------------------------------------------------- cantor_point

Point2 cantor_point(const RenormTower& tower, const Word& w) {
    PsiMap psi(tower, w);
    const Box& B = tower.map(static_cast<int>(w.length())).box;
    Point2 z{B.x.mid(), B.y.mid()};
    for (int it = 0; it < 400; ++it) {
        Point2 zn = psi(z);
        if (dist(zn, z) < 1e-14) return zn;
        z = zn;
    }
    return z;
}

// ------------------------------------------------------- NonlinearPart

NonlinearPart::NonlinearPart(const RenormTower& tower, int k, int n)
    : tower_(&tower), k_(k), n_(n) {
    if (!(0 <= k && k < n && n <= tower.depth())) {
        throw std::out_of_range("nonlinear part levels");
    }
    tau_k_ = tower.tip(k);
    tau_n_ = tower.tip(n);
    D_ = Eigen::Matrix2d::Identity();
    for (int j = k; j < n; ++j) {
        D_ = D_ * tower.levels[static_cast<std::size_t>(j)].D;
    }
    double det = D_.determinant();
    if (std::abs(det) < 1e-250) {
        throw std::runtime_error("nonlinear part: near-singular linear part");
    }
    D_inv_ = D_.inverse();
}

Point2 NonlinearPart::operator()(Point2 z) const {
    Point2 p{z.x + tau_n_.x, z.y + tau_n_.y};
    for (int j = n_ - 1; j >= k_; --j) {
        p = tower_->levels[static_cast<std::size_t>(j)].step.psi_v(p);
    }
    Eigen::Vector2d img(p.x - tau_k_.x, p.y - tau_k_.y);
    Eigen::Vector2d s = D_inv_ * img;
    return {s[0] - z.x, s[1] - z.y};
}

NonlinearPart nonlinear_part(const RenormTower& tower, int k, int n) {
    return NonlinearPart(tower, k, n);
}

}  // namespace renormlab
