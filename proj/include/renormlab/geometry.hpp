#pragma once

#include <vector>

#include "renormlab/measure.hpp"
#include "renormlab/microscope.hpp"

namespace renormlab {

/// One parent piece together with the separation of its two children.
struct GapRow {
    int n = 0;           // level of the parent piece
    Word word;           // parent word (length n)
    double diam = 0.0;   // diameter of the parent piece
    double gap = 0.0;    // distance between the children's hulls
    double ratio = 0.0;  // gap / diam
};

struct GeometryReport {
    std::vector<GapRow> rows;       // parents at levels 0 .. max_level-1
    double holder_alpha_fit = 0.0;  // slope of log diam against log gap
    double min_gap_ratio = 0.0;
    double diam_scale_C = 0.0;      // max diam / sigma^n fitted at level 2
};

/// Diameters and child gaps per piece up to max_level, the fitted exponent
/// of gap^alpha >= C diam, and the smallest gap/diam ratio.  Propagates
/// GeometryViolation from the piece construction.
GeometryReport geometry_stats(const RenormTower& tower, int max_level);

/// Box-counting dimension estimate: slope of log N(s) against log(1/s) over
/// the usable scales (those where the count neither saturates at the sample
/// size nor collapses to a single box).  Throws std::invalid_argument when
/// fewer than 4 scales are usable or they span less than a decade.
double hausdorff_estimate(const std::vector<Point2>& points,
                          const std::vector<double>& scales);

/// One coded point per level-n cylinder, for dimension estimates.
std::vector<Point2> cantor_sample(const RenormTower& tower, int n);

/// One marked-point pair of the non-rigidity construction.
struct NonrigidityPair {
    int k = 0;
    int n = 0;           // scale with sigma^{n+1} <= b_G^{2^k} < sigma^n
    double dist_F = 0.0; // dist(W_k, Z_k^{k+n}) in the domain of F
    double dist_G = 0.0; // same for G
    double alpha = 0.0;  // log dist_F / log dist_G
    bool valid = false;
};

struct NonrigidityResult {
    double alpha_empirical = 0.0;  // min over valid pairs
    double alpha_bound = 0.0;      // (1 + ln b_F / ln b_G) / 2
    double b_F = 0.0, b_G = 0.0;
    std::vector<NonrigidityPair> pairs;
    // dist_G at k = 1 for a range of n, and the fitted power of sigma^n
    std::vector<std::pair<int, double>> tilde_scaling;
    double tilde_slope = 0.0;  // expected 2: dist ~ sigma^{2n+k}
};

/// Marked-point Hoelder-exponent probe between two infinitely
/// renormalizable maps with different average Jacobians (b_F > b_G).  The
/// pairs are w_k = F_k(tip_k) and z = F_k(Psi^{k+n}_k(c_{k+n})) with
/// c_m = F_m^{-1}(tip_m), both pushed to level 0 through Psi_0^k.
NonrigidityResult nonrigidity_probe(const RenormTower& towerF,
                                    const RenormTower& towerG);

/// One b-grid sample of the unbounded-geometry scan.
struct ScanSample {
    double b = 0.0;
    double a = 0.0;        // located family parameter
    int n = 0;             // scale level with b^{2^k} ~ sigma^{n-k}
    double offset = 0.0;   // pi_1(c^n_k) - pi_1(tip_k)
    bool valid = false;
};

/// A parameter where c^n_k sits vertically below the tip.
struct ScanCrossing {
    int k = 0;
    int n = 0;
    double b = 0.0;
    double a = 0.0;
    double residual = 0.0;      // |pi_1(c^n_k) - pi_1(tip_k)| after bisection
    double min_ratio = 0.0;     // smallest child gap/diam at level n
    double median_ratio = 0.0;  // median of the same over all level-n parents
};

struct ScanResult {
    std::vector<ScanSample> samples;     // all (b, k) grid evaluations
    std::vector<ScanCrossing> crossings;
};

/// Scans points_per_k log-spaced average-Jacobian values in [b_lo, b_hi] for
/// k = 1, 2, tracking the sign of the horizontal offset between the coded
/// point c^n_k and the tip; sign changes within a fixed-n segment are
/// bisected to vertical alignment.  Parallel over grid points; worker count
/// from RENORMLAB_THREADS.
ScanResult unbounded_geometry_scan(double b_lo, double b_hi,
                                   int points_per_k = 64);

}  // namespace renormlab
