#include "renormlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace renormlab {

namespace {

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Interior sample points of a box (fraction of the width around the center).
std::vector<Point2> interior_grid(const Box& B, int nx, int ny,
                                  double fraction) {
    std::vector<Point2> pts;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            double tx = nx == 1 ? 0.0 : -0.5 + static_cast<double>(i) / (nx - 1);
            double ty = ny == 1 ? 0.0 : -0.5 + static_cast<double>(j) / (ny - 1);
            pts.push_back({B.x.mid() + fraction * B.x.width() * tx,
                           B.y.mid() + fraction * B.y.width() * ty});
        }
    }
    return pts;
}

}  // namespace

MeasureEstimate average_jacobian(const RenormTower& tower, int n) {
    if (n < 1 || n > tower.depth()) {
        throw std::out_of_range("average_jacobian: depth exceeds tower");
    }
    MeasureEstimate est;
    est.depth_used = n;
    const HenonLikeMap& F = tower.map(0);
    if (F.degenerate()) {
        est.degenerate = true;
        return est;
    }

    // cylinder estimator: weight 2^-n at one coded point per cylinder
    double sum_cyl = 0.0;
    unsigned long count = 1ul << n;
    for (unsigned long v = 0; v < count; ++v) {
        double j = F.jacobian(cantor_point(tower, Word::from_value(v, n)));
        if (j <= 0.0) {
            est.degenerate = true;
            return est;
        }
        sum_cyl += std::log(j);
    }
    est.b = std::exp(sum_cyl / static_cast<double>(count));

    // Birkhoff estimator along the orbit of the tip
    double sum_orb = 0.0;
    Point2 p = tower.tip(0);
    for (unsigned long i = 0; i < count; ++i) {
        double j = F.jacobian(p);
        if (j <= 0.0) {
            est.degenerate = true;
            return est;
        }
        sum_orb += std::log(j);
        p = F.apply(p);
    }
    est.b_orbit = std::exp(sum_orb / static_cast<double>(count));

    est.distortion_bound = distortion_check(tower, n);
    return est;
}

double distortion_check(const RenormTower& tower, int n) {
    if (n < 1 || n > tower.depth()) {
        throw std::out_of_range("distortion_check: depth exceeds tower");
    }
    const HenonLikeMap& F = tower.map(0);
    if (F.degenerate()) return 0.0;

    std::vector<Point2> grid = interior_grid(tower.map(n).box, 5, 4, 0.6);
    double worst = 0.0;
    unsigned long count = 1ul << n;
    for (unsigned long v = 0; v < count; ++v) {
        PsiMap psi(tower, Word::from_value(v, n));
        for (std::size_t j = 0; j + 1 < grid.size(); j += 2) {
            Point2 pa = psi(grid[j]), pb = psi(grid[j + 1]);
            double la = 0.0, lb = 0.0;
            for (unsigned long k = 1; k <= count; ++k) {
                double ja = F.jacobian(pa), jb = F.jacobian(pb);
                if (ja <= 0.0 || jb <= 0.0) break;
                la += std::log(ja);
                lb += std::log(jb);
                worst = std::max(worst, std::abs(la - lb));
                auto qa = F.try_apply(pa);
                auto qb = F.try_apply(pb);
                if (!qa || !qb) break;
                pa = *qa;
                pb = *qb;
            }
        }
    }
    return worst;
}

std::vector<double> jacobian_power_check(const RenormTower& tower, int n) {
    const HenonLikeMap& F = tower.map(0);
    if (F.degenerate()) return {};
    double b = tower.b;
    if (b <= 0.0) {
        b = average_jacobian(tower, std::min(tower.depth(), std::max(n, 4))).b;
    }
    if (b <= 0.0) return {};

    std::vector<double> ratios;
    unsigned long count = 1ul << n;
    for (unsigned long v = 0; v < count; ++v) {
        Point2 p = cantor_point(tower, Word::from_value(v, n));
        double lsum = 0.0;
        bool ok = true;
        for (unsigned long k = 0; k < count; ++k) {
            double j = F.jacobian(p);
            if (j <= 0.0) {
                ok = false;
                break;
            }
            lsum += std::log(j);
            auto q = F.try_apply(p);
            if (!q) {
                ok = false;
                break;
            }
            p = *q;
        }
        if (ok) {
            ratios.push_back(
                std::exp(lsum - static_cast<double>(count) * std::log(b)));
        }
    }
    return ratios;
}

std::pair<double, double> characteristic_exponents(const HenonLikeMap& F,
                                                   const RenormTower& tower,
                                                   int N_power) {
    unsigned long steps = 1ul << N_power;
    Point2 p = tower.tip(0);
    Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
    double s0 = 0.0, s1 = 0.0;
    for (unsigned long i = 0; i < steps; ++i) {
        Eigen::Matrix2d Z = F.differential(p) * Q;
        Eigen::HouseholderQR<Eigen::Matrix2d> qr(Z);
        Eigen::Matrix2d R = qr.matrixQR().triangularView<Eigen::Upper>();
        Q = qr.householderQ();
        double r0 = std::abs(R(0, 0)), r1 = std::abs(R(1, 1));
        if (r0 <= 0.0 || r1 <= 0.0) {
            return {s0 / static_cast<double>(i + 1),
                    -std::numeric_limits<double>::infinity()};
        }
        s0 += std::log(r0);
        s1 += std::log(r1);
        auto q = F.try_apply(p);
        if (!q) {
            throw std::runtime_error(
                "characteristic_exponents: orbit escaped at step " +
                std::to_string(i));
        }
        p = *q;
    }
    double e0 = s0 / static_cast<double>(steps);
    double e1 = s1 / static_cast<double>(steps);
    if (e0 < e1) std::swap(e0, e1);
    return {e0, e1};
}

std::vector<DirectionProbe> contracting_direction_probe(
    const RenormTower& tower, int k_max) {
    std::vector<DirectionProbe> out;
    const int window = 64;   // backward-window length for the SVD
    const int scan = 256;    // orbit points scanned for cone visits
    Point2 tip0 = tower.tip(0);

    for (int n = 1; n <= std::min(k_max, tower.depth()); ++n) {
        DirectionProbe pr;
        pr.level = n;
        const HenonLikeMap& Fn = tower.map(n);
        if (Fn.degenerate()) {
            // rank-1 differential: the contracted direction is vertical
            // everywhere and cannot be dynamically oriented
            pr.degenerate = true;
            pr.theta_plus = M_PI / 2;
            pr.theta_minus = -M_PI / 2;
            pr.gap = 0.0;
            out.push_back(pr);
            continue;
        }

        // orbit of the level-n tip
        std::vector<Point2> z;
        z.reserve(scan + window + 1);
        z.push_back(tower.tip(n));
        bool escaped = false;
        for (int i = 0; i < scan + window; ++i) {
            auto q = Fn.try_apply(z.back());
            if (!q) {
                escaped = true;
                break;
            }
            z.push_back(*q);
        }
        if (escaped) {
            out.push_back(pr);
            continue;
        }

        // cone aperture from the sampled expansion coefficient
        double abar = 0.0;
        for (int i = 0; i < scan; ++i) {
            abar = std::max(
                abar, std::abs(Fn.df(z[i].x) - Fn.eps_dx(z[i].x, z[i].y)));
        }
        double kappa = std::max(2.0 * abar, 1.0);
        double alpha = std::atan2(1.0, kappa);  // arccot

        // most-contracted direction per point, dynamically oriented
        std::vector<Eigen::Vector2d> dir(scan);
        for (int i = 0; i < scan; ++i) {
            Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
            for (int j = 0; j < window; ++j) {
                M = Fn.differential(z[i + j]) * M;
                M /= M.norm();
            }
            Eigen::JacobiSVD<Eigen::Matrix2d> svd(M, Eigen::ComputeFullV);
            Eigen::Vector2d v = svd.matrixV().col(1);
            if (i == 0) {
                if (v[1] < 0) v = -v;
            } else {
                Eigen::Vector2d w = Fn.differential(z[i - 1]) * dir[i - 1];
                if (v.dot(w) < 0) v = -v;
            }
            dir[i] = v;
        }

        int i_plus = -1, i_minus = -1;
        for (int i = 0; i < scan && (i_plus < 0 || i_minus < 0); ++i) {
            double th = std::atan2(dir[i][1], dir[i][0]);
            if (i_plus < 0 && th >= alpha && th <= M_PI - alpha) i_plus = i;
            if (i_minus < 0 && th <= -alpha && th >= -M_PI + alpha) i_minus = i;
        }
        if (i_plus < 0 || i_minus < 0) {
            out.push_back(pr);
            continue;
        }

        PsiMap psi(tower, Word::vs(static_cast<std::size_t>(n)));
        auto push = [&](int i, Point2& zp, double& theta, double& d) {
            zp = psi(z[i]);
            Eigen::Vector2d v = psi.differential(z[i]) * dir[i];
            theta = std::atan2(v[1], v[0]);
            d = dist(zp, tip0);
        };
        push(i_plus, pr.z_plus, pr.theta_plus, pr.dist_plus);
        push(i_minus, pr.z_minus, pr.theta_minus, pr.dist_minus);
        // label by the sign of the pushed vertical component
        if (pr.theta_plus < 0.0 && pr.theta_minus > 0.0) {
            std::swap(pr.theta_plus, pr.theta_minus);
            std::swap(pr.z_plus, pr.z_minus);
            std::swap(pr.dist_plus, pr.dist_minus);
        }
        pr.gap = std::abs(pr.theta_plus - pr.theta_minus);
        pr.found = true;
        out.push_back(pr);
    }
    return out;
}

}  // namespace renormlab
