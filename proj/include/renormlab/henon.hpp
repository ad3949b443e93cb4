#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>

#include "renormlab/unimodal.hpp"

namespace renormlab {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// A Hénon-like map F(x,y) = (f(x) - eps(x,y), x) on the box B.
/// The 1D part f is fit on a wider interval than B's horizontal side so that
/// the inverse branches used by the renormalization never extrapolate.
struct HenonLikeMap {
    UnimodalMap f;
    ChebSeries2D eps;
    Box box;
    double eps_norm = 0.0;  // sup|eps| on B (33x33 sample)
    // caches built by from_parts
    ChebSeries df;
    ChebSeries2D eps_dx;
    ChebSeries2D eps_dy;

    bool degenerate() const { return eps_norm < 1e-13; }
    bool contains(Point2 p, double tol = 1e-9) const;

    /// phi_y(x) = f(x) - eps(x,y), the horizontal family of diffeomorphisms.
    double phi(double x, double y) const;
    /// Inverse of phi_y on the expanding branch right of the critical point.
    double phi_inverse(double x, double y) const;

    Point2 apply(Point2 p) const;                   // throws on domain escape
    std::optional<Point2> try_apply(Point2 p) const;
    double jacobian(Point2 p) const;                // |d eps / dy|
    Eigen::Matrix2d differential(Point2 p) const;

    static HenonLikeMap from_parts(UnimodalMap f, ChebSeries2D eps, Box box);
    static HenonLikeMap degenerate_from(const UnimodalMap& f, Box box);
};

/// Standard computational frame for normalized maps: 1D parts are fit on
/// kHenonDom and boxes are kHenonBox, leaving room for inverse branches.
extern const Interval kHenonDom;
extern const Box kHenonBox;

/// The classical family F(x,y) = (1 - a x^2 - b y, x) in its natural
/// coordinates, on a box wide enough to contain both saddles.
HenonLikeMap henon_family(double a, double b);

/// Conjugate F by the diagonal affine map (A,A) that normalizes the 1D part
/// (critical value to 1, its image to -1), refit in the standard frame.
HenonLikeMap normalize_henon(const HenonLikeMap& F);

struct Saddle {
    Point2 p;
    std::array<double, 2> eigs;  // sorted by modulus, descending
    bool regular = false;        // unstable eigenvalue positive
};

/// The two fixed saddles: regular beta0 (positive unstable eigenvalue) and
/// flip beta1 (negative unstable eigenvalue), located by Newton on the
/// diagonal reduction f(x) - eps(x,x) = x seeded from sampled sign changes.
std::pair<Saddle, Saddle> fixed_saddles(const HenonLikeMap& F);

struct Prerenorm {
    ChebSeries g;       // 1D trace of G at the reference horizontal
    ChebSeries2D delta; // g(x) - G1(x,y); quadratically small in eps
    double y_ref = 0.0;
    Interval V;         // horizontal domain of g / delta
};

/// G = H∘F²∘H⁻¹ with H(x,y) = (phi(x,y), y) has first coordinate
/// G1(x,y) = phi(phi(x, phi_y⁻¹(x)), x) and second coordinate x.  Splits
/// G1 into the 1D trace g(x) = G1(x, y_ref) (y_ref = y-coordinate of the
/// approximate tip, i.e. the critical point of f) and the remainder delta.
Prerenorm prerenormalize(const HenonLikeMap& F);

/// One renormalization step: J = invariant hull of the trace's dynamical
/// interval, s: J -> I orientation-reversing, Lambda = (s,s),
/// RF = Lambda∘G∘Lambda⁻¹ refit as a Hénon-like map, followed by the
/// affine conjugacy normalizing the new 1D part.
struct RenormStep {
    HenonLikeMap RF;
    HenonLikeMap F;    // source map (owned copy; the psi branches need it)
    Prerenorm pre;
    Interval J;
    AffineMap s;       // total horizontal rescaling J -> I (orient.-reversing)
    double lambda = 0.0;

    Point2 H(Point2 p) const;       // (phi(x,y), y)
    Point2 H_inverse(Point2 p) const;
    Point2 Lambda(Point2 p) const;  // (s x, s y)
    Point2 Lambda_inverse(Point2 p) const;

    /// psi_v = H⁻¹∘Λ⁻¹ and psi_c = F∘psi_v; psi_c preserves vertical lines.
    Point2 psi_v(Point2 p) const;
    Point2 psi_c(Point2 p) const;
    Eigen::Matrix2d dpsi_v(Point2 p) const;  // analytic, upper triangular
    Eigen::Matrix2d dpsi_c(Point2 p) const;
};

RenormStep renormalize(const HenonLikeMap& F);

struct HenonReport {
    double eps_norm = 0.0;
    bool dy_sign_constant = true;
    int dy_sign = 0;            // sign of d eps/dy (0 for degenerate)
    Point2 dy_sign_violation;   // where the sign flips, if it does
    double xder_margin = 0.0;   // kappa/2 - sup|d eps/dx| on the expanding U
    bool f_unimodal = true;
    bool jacobian_zero = false; // degenerate flag
    bool ok = false;
};

HenonReport verify_henon_like(const HenonLikeMap& F);

/// Parameter a of the family (1 - a x^2 - b y, x) on the boundary of
/// depth-fold renormalizability: roots a_k of "critical point of the k-th
/// renormalized 1D part hits the interval edge" (the superstable analogue),
/// located by bisection, then geometric extrapolation of the cascade.
struct HenonCascade {
    std::vector<double> a_super;
    double delta_estimate = 0.0;
    double a_star_estimate = 0.0;
};
HenonCascade henon_cascade(double b, int m);

/// Convenience: a-parameter at which the family is at least depth times
/// renormalizable (validated), from henon_cascade extrapolation.
double locate_infinitely_renormalizable(double b, int depth);

}  // namespace renormlab
