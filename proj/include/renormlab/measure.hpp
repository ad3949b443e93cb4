#pragma once

#include <utility>
#include <vector>

#include "renormlab/microscope.hpp"

namespace renormlab {

/// The invariant measure of the Cantor attractor gives every level-n
/// cylinder weight exactly 2^-n (odometer uniqueness), so integrals reduce
/// to uniform averages over one sample point per cylinder.
struct MeasureEstimate {
    double b = 0.0;        // exp of the cylinder average of log Jac
    double b_orbit = 0.0;  // exp of the Birkhoff average along the tip orbit
    int depth_used = 0;
    double distortion_bound = 0.0;  // sampling error proxy for both averages
    bool degenerate = false;        // Jacobian vanishes identically
};

/// Average Jacobian b = exp(2^-n sum_w log Jac F(x_w)) with one coded point
/// x_w per level-n cylinder, plus the orbit estimator along 2^n iterates of
/// the tip.  Requires tower depth >= n.
MeasureEstimate average_jacobian(const RenormTower& tower, int n);

/// Max over level-n pieces, point pairs inside a piece, and k <= 2^n of
/// |log Jac F^k(y) - log Jac F^k(z)|; 0 for maps with constant Jacobian.
double distortion_check(const RenormTower& tower, int n);

/// Ratios Jac F^{2^n}(z) / b^{2^n} at one coded point per level-n piece,
/// computed in log space.  b is taken from tower.b when positive, otherwise
/// estimated internally.  Empty for degenerate maps.
std::vector<double> jacobian_power_check(const RenormTower& tower, int n);

/// Characteristic exponents of the invariant measure along the orbit of the
/// tip (length 2^N_power), via QR-reorthonormalized cocycle products.
/// Returns (chi0, chi_minus) sorted descending; chi0 ~ 0, chi_minus ~ log b.
std::pair<double, double> characteristic_exponents(const HenonLikeMap& F,
                                                   const RenormTower& tower,
                                                   int N_power);

/// One level of the contracting-direction probe: points of the level-n
/// attractor whose dynamically-oriented contracting direction lies in the
/// upper / lower cone, pushed to the tip frame through Psi^n_v.
struct DirectionProbe {
    int level = 0;
    bool found = false;
    bool degenerate = false;
    Point2 z_plus, z_minus;        // pushed points, near the tip of F
    double theta_plus = 0.0;       // pushed angle with positive y-component
    double theta_minus = 0.0;      // pushed angle with negative y-component
    double dist_plus = 0.0;        // |z_plus - tip|
    double dist_minus = 0.0;
    double gap = 0.0;              // |theta_plus - theta_minus|
};

/// For each level n = 1..k_max, orients the most-contracted direction field
/// along the orbit of the level-n tip (fresh backward-window SVD per point,
/// orientation propagated by the differential), finds visits to both cones
/// C^+_alpha and C^-_alpha (alpha = arccot max(2 max|a|, 1)), and pushes the
/// points and directions down to the tip of F.  The angle gap staying near
/// pi while both points approach the tip exhibits the discontinuity of any
/// would-be invariant direction field.
std::vector<DirectionProbe> contracting_direction_probe(
    const RenormTower& tower, int k_max);

}  // namespace renormlab
