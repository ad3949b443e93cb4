#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace renormlab {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double tol = 0.0) const {
        return x >= lo - tol && x <= hi + tol;
    }
    Interval padded(double p) const { return {lo - p, hi + p}; }
};

Interval sorted_interval(double a, double b);

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CompositionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MonotoneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTailTol = 1e-12;

/// A function on [lo, hi] as a truncated Chebyshev series.
/// Values are immutable after construction and safe to share across threads.
class ChebSeries {
public:
    ChebSeries() : coeffs_{0.0} {}
    ChebSeries(std::vector<double> coeffs, Interval domain,
               double tail_tol = kDefaultTailTol);

    /// Interpolation at Chebyshev (second kind) points of the given degree.
    static ChebSeries fit(const std::function<double(double)>& sampler,
                          Interval domain, int degree,
                          double tail_tol = kDefaultTailTol);

    static ChebSeries constant(double value, Interval domain);
    static ChebSeries identity(Interval domain);

    /// Clenshaw evaluation. x must lie in the domain up to a 1e-12 clamp.
    double operator()(double x) const;

    /// Evaluation without the domain check; mild extrapolation is allowed
    /// for internal use (analytic continuation of the interpolant).
    double eval_unclamped(double x) const;

    ChebSeries derivative() const;

    const std::vector<double>& coeffs() const { return coeffs_; }
    Interval domain() const { return domain_; }
    double tail_tol() const { return tail_tol_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    double max_abs_coeff() const;

    /// |last two coefficients| < tail_tol * max|coeffs| after a fit.
    bool resolved() const { return resolved_; }

    /// Sup of |s| on a dense grid.
    double sup_norm(int samples = 512) const;

private:
    std::vector<double> coeffs_;
    Interval domain_;
    double tail_tol_ = kDefaultTailTol;
    bool resolved_ = true;

    void check_resolution();
};

struct Box {
    Interval x;
    Interval y;
};

/// Tensor-Chebyshev series on a box. coeffs(i, j) multiplies T_i(x) T_j(y).
class ChebSeries2D {
public:
    ChebSeries2D();
    ChebSeries2D(Eigen::MatrixXd coeffs, Box domain,
                 double tail_tol = kDefaultTailTol);

    static ChebSeries2D fit(const std::function<double(double, double)>& sampler,
                            Box domain, int degree_x, int degree_y,
                            double tail_tol = kDefaultTailTol);

    static ChebSeries2D zero(Box domain);

    double operator()(double x, double y) const;
    double eval_unclamped(double x, double y) const;

    ChebSeries2D derivative_x() const;
    ChebSeries2D derivative_y() const;

    /// Restriction to a horizontal line y = const, as a 1D series.
    ChebSeries slice_y(double y) const;

    const Eigen::MatrixXd& coeffs() const { return coeffs_; }
    Box domain() const { return domain_; }
    bool resolved() const { return resolved_; }
    bool is_zero() const;
    double max_abs_coeff() const;
    double sup_norm(int nx = 48, int ny = 24) const;

private:
    Eigen::MatrixXd coeffs_;
    Box domain_;
    double tail_tol_ = kDefaultTailTol;
    bool resolved_ = true;

    void check_resolution();
};

/// Refit of x -> outer(inner(x)) at Chebyshev nodes.
ChebSeries compose(const ChebSeries& outer, const ChebSeries& inner,
                   int degree = -1);

/// Solves s(x) = y on a bracket where s is strictly monotone.
/// Newton iteration with guaranteed bracket retention (bisection fallback).
double invert_monotone(const ChebSeries& s, double y, Interval bracket);

/// eta = D^2 s / D s, refit on the domain of s.
ChebSeries nonlinearity(const ChebSeries& s);

struct AffineMap {
    // x -> scale * x + offset
    double scale = 1.0;
    double offset = 0.0;

    double operator()(double x) const { return scale * x + offset; }
    AffineMap inverse() const { return {1.0 / scale, -offset / scale}; }

    /// The affine map sending [from.lo, from.hi] onto [to.lo, to.hi].
    /// orientation < 0 sends from.lo -> to.hi.
    static AffineMap between(Interval from, Interval to, int orientation = 1);
};

ChebSeries affine_conjugate(const ChebSeries& f, const AffineMap& a,
                            Interval new_domain, int degree = -1);

}  // namespace renormlab
