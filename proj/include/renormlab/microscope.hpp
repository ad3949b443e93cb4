#pragma once

#include <string>
#include <vector>

#include "renormlab/henon.hpp"

namespace renormlab {

/// A finite word over the alphabet {v, c}.  letters[k] is w_{k+1} with
/// v = 0 and c = 1; the numeric value is Σ letters[k] 2^k, so letters[0]
/// is the least significant digit and the successor implements the odometer
/// ("add one with carry", wrapping at 2^length).
struct Word {
    std::vector<int> letters;

    std::size_t length() const { return letters.size(); }
    unsigned long value() const;
    Word successor() const;
    std::string str() const;  // e.g. "vcv"

    static Word vs(std::size_t n);  // v^n
    static Word from_value(unsigned long value, std::size_t length);

    bool operator==(const Word& o) const { return letters == o.letters; }
};

/// One level of the renormalization tower: the map F_k = R^k F, the step
/// producing F_{k+1}, the tip tau_k, and the differential D_k of the
/// tip-translated branch psi_v^{(k)} with its diagonal entries alpha_k,
/// beta_k and the tilt t_k = D_k(0,1)/D_k(1,1).
struct TowerLevel {
    RenormStep step;  // step.F is F_k, step.RF is F_{k+1}
    Point2 tau;
    Eigen::Matrix2d D;
    double alpha = 0.0;
    double beta = 0.0;
    double t = 0.0;
    /// Distance between the recursed tip at this level and the direct
    /// critical-value estimate (f_k(c_k), c_k); O(|eps_k|).
    double tip_residual = 0.0;
};

struct RenormTower {
    std::vector<TowerLevel> levels;
    HenonLikeMap top;   // F_depth
    Point2 tau_top;     // tip seed of the top map
    double b = 0.0;     // average Jacobian, filled by the measure module
    int requested_depth = 0;
    std::string failure;  // nonempty if construction stopped early

    int depth() const { return static_cast<int>(levels.size()); }
    bool complete() const { return failure.empty(); }
    const HenonLikeMap& map(int k) const;  // F_k for 0 <= k <= depth
    Point2 tip(int k) const;               // tau_k for 0 <= k <= depth
};

/// Builds the tower F, RF, ..., R^depth F.  Tips are seeded at the top by
/// the critical-value point of the (nearly degenerate) deepest map and pulled
/// down through tau_k = psi_v^{(k)}(tau_{k+1}); the seed error contracts
/// geometrically on the way down.  A renormalization failure at level k
/// yields a partial tower with the failure recorded.
RenormTower build_tower(const HenonLikeMap& F, int depth);

/// The composite branch Psi^n_w = psi^{(0)}_{w_1} o ... o psi^{(n-1)}_{w_n}
/// mapping level-n coordinates into level-0 coordinates.  The innermost
/// branch letter is letters[n-1].
class PsiMap {
public:
    PsiMap(const RenormTower& tower, Word w);

    Point2 operator()(Point2 p) const;
    Eigen::Matrix2d differential(Point2 p) const;  // chain rule, analytic
    const Word& word() const { return w_; }

private:
    const RenormTower* tower_;
    Word w_;
};

PsiMap psi_word(const RenormTower& tower, const Word& w);

/// Piece B^n_w = Psi^n_w(B), represented by the image of a boundary sampling
/// of the level-n box together with its convex hull and bounding box.
struct Piece {
    Word word;
    std::vector<Point2> boundary;  // images of the box boundary samples
    std::vector<Point2> hull;      // convex hull of the boundary, ccw
    Box bbox;
    double diam = 0.0;
};

/// All 2^n level-n pieces.  Throws GeometryViolation if two hulls overlap
/// (separating-axis test with a small margin) or if a child piece escapes
/// its parent's hull.
std::vector<Piece> pieces(const RenormTower& tower, int n);

struct GeometryViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The point of the Cantor set coded by w: the fixed point of the
/// contraction Psi^{|w|}_w, found by iteration.
Point2 cantor_point(const RenormTower& tower, const Word& w);

/// The nonlinear part S^n_k of the factorization
/// Psi^n_k = D^n_k o (id + S^n_k) in tip-translated coordinates, where
/// Psi^n_k is the all-v composite from level n to level k and
/// D^n_k = D_k D_{k+1} ... D_{n-1}.  The second coordinate of S^n_k
/// vanishes identically (the v-branches are affine in y).
class NonlinearPart {
public:
    NonlinearPart(const RenormTower& tower, int k, int n);

    /// Full vector S^n_k(z); z in tip-translated level-n coordinates.
    Point2 operator()(Point2 z) const;
    const Eigen::Matrix2d& D() const { return D_; }

private:
    const RenormTower* tower_;
    int k_, n_;
    Point2 tau_k_, tau_n_;
    Eigen::Matrix2d D_, D_inv_;
};

NonlinearPart nonlinear_part(const RenormTower& tower, int k, int n);

}  // namespace renormlab
