#pragma once

#include <vector>

#include "renormlab/measure.hpp"
#include "renormlab/microscope.hpp"

namespace renormlab {

/// Row of the universality profile: the y-derivative of the level-n
/// perturbation at y=0 divided by b^{2^n} a(x) on an x-grid; the law says
/// the ratio tends to 1.
struct UniversalityRow {
    int n = 0;
    double eps_norm = 0.0;
    std::vector<double> xs;
    std::vector<double> ratios;
    double max_dev = 0.0;  // max |ratio - 1|
    double variance = 0.0;
    bool valid = false;    // b^{2^n} above the double-precision noise floor
};

struct UniversalityReport {
    std::vector<UniversalityRow> rows;
    bool degenerate = false;
};

UniversalityReport universality_check(const RenormTower& tower,
                                      const ChebSeries& a, double b);

/// Tilt ratios t_k / (-b^{2^k}); bounded between 1/10 and 10 with constant
/// sign once the tower settles.
struct TiltRow {
    int k = 0;
    double t = 0.0;
    double ratio = 0.0;
    bool valid = false;
};

std::vector<TiltRow> tilt_asymptotics(const RenormTower& tower, double b);

/// The curvature coefficient a_F: quadratic coefficient of y -> S^n_0(0, y),
/// fitted at successive depths.
struct CurvatureFit {
    double a_F = 0.0;
    std::vector<double> a_n;      // per-depth quadratic coefficients
    std::vector<double> cubic_n;  // per-depth cubic coefficients
    double convergence = 0.0;     // |a_n - a_{n-1}| at the deepest level
    double residual = 0.0;        // max fit residual at the deepest level
    bool unstable = false;
};

CurvatureFit curvature_aF(const RenormTower& tower);

/// Deviation of the n-th affine (or quadratic) renormalization from its
/// universal limit, measured on a fixed 17x9 grid in the tip chart; grid
/// points where a chart or inverse fails are excluded and counted.
struct RescaledRenormReport {
    int n = 0;
    double deviation = 0.0;
    int excluded = 0;
    int total = 0;
    double second_coord_ydep = 0.0;  // y-dependence of the second coordinate
};

RescaledRenormReport affine_renorm(const RenormTower& tower, int n,
                                   double a_F, const FixedPointResult& fp,
                                   const UniversalDiffeos& ud);

RescaledRenormReport quadratic_renorm(const RenormTower& tower, int n,
                                      double a_F, const FixedPointResult& fp,
                                      const UniversalDiffeos& ud);

/// Super-exponential collapse of the perturbations: linear fit of
/// log eps_n against 2^n over the levels above the noise floor.
struct SuperexpCheck {
    std::vector<double> norms;  // per-level eps sup-norms
    double slope = 0.0;
    double r2 = 0.0;
    int levels_used = 0;
    bool degenerate = false;
};

SuperexpCheck superexp_check(const RenormTower& tower);

}  // namespace renormlab
