#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "renormlab/cheb.hpp"

namespace renormlab {

struct NotUnimodalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotRenormalizableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A unimodal map f: I -> I together with its critical point and the
/// dynamical interval [f^2(c), f(c)]. "normalized" means f(c)=1 and
/// f(1)=-1 hold to 1e-9 (so the dynamical interval is [-1,1]).
struct UnimodalMap {
    ChebSeries f;
    double c = 0.0;
    Interval dyn{-1.0, 1.0};
    bool normalized = false;

    double operator()(double x) const { return f(x); }

    /// Validates the single-sign-change property (512 samples), locates c
    /// by Newton on f', and fills the dynamical interval metadata.
    static UnimodalMap from_series(const ChebSeries& f,
                                   std::optional<Interval> reference = {});
};

/// Affine conjugation bringing a unimodal map into the normalized space:
/// the conjugator A solves A(f(c))=1, A(f^2(c))=-1, so the result maps its
/// critical point to 1 and 1 to -1. Works for peak- and valley-shaped input.
UnimodalMap normalize(const UnimodalMap& f);

/// The quadratic representative x -> 1 - a x^2 fit on an extended domain.
UnimodalMap quadratic_map(double a);
/// Same map affinely conjugated into the normalized space.
UnimodalMap normalized_quadratic(double a);

double critical_point(const UnimodalMap& f);

struct Renormalizability {
    bool ok = false;
    Interval J;       // sorted [f^4(c), f^2(c)]
    std::string why;  // failure reason when !ok
};

/// Period-doubling renormalizability around the critical point:
/// J_c = [f^4(c), f^2(c)] (sorted), J_c disjoint from f(J_c), f^2(J_c) in J_c.
Renormalizability renormalizable_c(const UnimodalMap& f);
/// Around the critical value: J_v = [f^3(c), f(c)] (sorted).
Renormalizability renormalizable_v(const UnimodalMap& f);

struct Renorm1D {
    UnimodalMap Rf;
    Interval J;
    AffineMap s;       // orientation-reversing J -> [-1, 1], min(J) -> +1
    double lambda;     // |I| / |J|
};

/// R_c f = s∘f^2|J_c∘s^{-1}, re-normalized into the space by affine
/// conjugacy when the drift exceeds 1e-9.
Renorm1D renorm_c(const UnimodalMap& f);
/// Same around the critical value interval J_v.
Renorm1D renorm_v(const UnimodalMap& f);

struct FixedPointResult {
    UnimodalMap f_star;
    double lambda = 0.0;
    double sigma = 0.0;
    double residual = 0.0;  // sup |R_c f* - f*| on a 512-point probe grid
    Interval J_c;
    Interval J_v;
    // Even-symmetry chart data: f*(x) = h((x - c)^2).
    ChebSeries h;
    double c = 0.0;
    int newton_iterations = 0;
};

/// Newton iteration on f -> R_c f - f over the even-symmetry coefficient
/// chart f(x) = h((x-c)^2), seeded from the 5-fold renormalization of the
/// cascade-located quadratic map.
FixedPointResult solve_fixed_point(int degree = 40, double tol = 1e-11);

/// Eigenvalues (sorted by modulus, descending) of the finite-difference
/// differential of R_c at f* restricted to the even-coefficient chart.
std::vector<std::complex<double>> operator_spectrum(const FixedPointResult& fp,
                                                    int dim);

/// Non-affine branch of the presentation function, g* = f*^{-1}∘s^{-1},
/// a contraction of I into J_v* with fixed point g*(1) = 1.
ChebSeries presentation_function(const FixedPointResult& fp);

struct UniversalDiffeos {
    ChebSeries u_star;
    ChebSeries v_star;            // (u*(x)-1)/u*'(1) + 1
    double u_prime_1 = 0.0;       // u*'(1)
    int iterations = 0;
    std::vector<double> step_sups;  // successive-iterate sup distances
};

/// u* = limit of affinely rescaled iterates of g*; v* its renormalized
/// variant with v*(1) = v*'(1) = 1.
UniversalDiffeos universal_diffeos(const ChebSeries& g_star, int n_iter = 60);

/// The universal function a(x) = v*'(x) / v*'(f*(x)).
ChebSeries universal_a(const FixedPointResult& fp, const ChebSeries& v_star);

struct CascadeResult {
    std::vector<double> a_super;   // superstable parameters a_1..a_m
    double delta_estimate = 0.0;   // limit of (a_k - a_{k-1})/(a_{k+1} - a_k)
    double a_star_estimate = 0.0;  // Richardson extrapolation of the limit
};

/// Superstable period-2^k parameters of the family x -> 1 - a x^2, located
/// by bisection on the critical orbit's 2^k-periodic return.
CascadeResult cascade_locate(int m);

/// Oracle for lambda: ratios of the nested critical intervals J_c(n)
/// (endpoints f^{2^n}(c), f^{2^{n+1}}(c)) of the quadratic map at parameter
/// a; pure orbit arithmetic, independent of the renormalization operator.
std::vector<double> quadratic_interval_ratios(double a, int n_max);

/// Level-n critical interval J_c(n) of f via the orbit of c (sorted
/// endpoints f^{2^n}(c), f^{2^{n+1}}(c)).
Interval critical_interval(const UnimodalMap& f, int n);
/// Level-n critical-value interval J_v(n) = f(J_c(n)).
Interval critical_value_interval(const UnimodalMap& f, int n);

}  // namespace renormlab
