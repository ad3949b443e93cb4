#include "renormlab/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace renormlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Chebyshev points of the second kind, x_j = cos(pi j / n), j = 0..n,
// mapped to [lo, hi]. Returned in decreasing order of the reference point.
std::vector<double> cheb_nodes(Interval dom, int n) {
    std::vector<double> pts(n + 1);
    for (int j = 0; j <= n; ++j) {
        double t = std::cos(kPi * j / n);
        pts[j] = dom.mid() + 0.5 * dom.width() * t;
    }
    return pts;
}

// Coefficients of the degree-n interpolant through values at cheb_nodes.
// Naive DCT-I; degrees here are small enough that O(n^2) is fine.
std::vector<double> nodes_to_coeffs(const std::vector<double>& vals) {
    const int n = static_cast<int>(vals.size()) - 1;
    std::vector<double> c(n + 1, 0.0);
    if (n == 0) {
        c[0] = vals[0];
        return c;
    }
    for (int k = 0; k <= n; ++k) {
        double acc = 0.5 * (vals[0] + (k % 2 == 0 ? vals[n] : -vals[n]));
        for (int j = 1; j < n; ++j) acc += vals[j] * std::cos(kPi * j * k / n);
        c[k] = 2.0 * acc / n;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    return c;
}

double clenshaw(const std::vector<double>& c, double t) {
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
        double b0 = 2.0 * t * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return t * b1 - b2 + c[0];
}

// Chebyshev differentiation recurrence on the reference interval [-1, 1].
std::vector<double> diff_coeffs(const std::vector<double>& c) {
    const int n = static_cast<int>(c.size()) - 1;
    if (n == 0) return {0.0};
    std::vector<double> d(n + 1, 0.0);
    d[n] = 0.0;
    d[n - 1] = 2.0 * n * c[n];
    for (int k = n - 1; k >= 1; --k)
        d[k - 1] = (k + 1 < n ? d[k + 1] : 0.0) + 2.0 * k * c[k];
    d[0] *= 0.5;
    d.pop_back();
    if (d.empty()) d.push_back(0.0);
    return d;
}

}  // namespace

Interval sorted_interval(double a, double b) {
    return a <= b ? Interval{a, b} : Interval{b, a};
}

AffineMap AffineMap::between(Interval from, Interval to, int orientation) {
    double s = to.width() / from.width();
    if (orientation < 0) s = -s;
    double off = (orientation < 0 ? to.hi : to.lo) - s * from.lo;
    return {s, off};
}

ChebSeries::ChebSeries(std::vector<double> coeffs, Interval domain,
                       double tail_tol)
    : coeffs_(std::move(coeffs)), domain_(domain), tail_tol_(tail_tol) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    if (!(domain_.width() > 0.0))
        throw DomainError("ChebSeries: empty domain");
    check_resolution();
}

ChebSeries ChebSeries::fit(const std::function<double(double)>& sampler,
                           Interval domain, int degree, double tail_tol) {
    if (degree < 1) throw DomainError("ChebSeries::fit: degree must be >= 1");
    auto pts = cheb_nodes(domain, degree);
    std::vector<double> vals(pts.size());
    for (size_t j = 0; j < pts.size(); ++j) vals[j] = sampler(pts[j]);
    return ChebSeries(nodes_to_coeffs(vals), domain, tail_tol);
}

ChebSeries ChebSeries::constant(double value, Interval domain) {
    return ChebSeries({value}, domain);
}

ChebSeries ChebSeries::identity(Interval domain) {
    return ChebSeries({domain.mid(), 0.5 * domain.width()}, domain);
}

double ChebSeries::operator()(double x) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(domain_.width()));
    if (!domain_.contains(x, tol))
        throw DomainError("ChebSeries: argument " + std::to_string(x) +
                          " outside [" + std::to_string(domain_.lo) + ", " +
                          std::to_string(domain_.hi) + "]");
    x = std::clamp(x, domain_.lo, domain_.hi);
    return eval_unclamped(x);
}

double ChebSeries::eval_unclamped(double x) const {
    double t = (2.0 * x - domain_.lo - domain_.hi) / domain_.width();
    return clenshaw(coeffs_, t);
}

ChebSeries ChebSeries::derivative() const {
    auto d = diff_coeffs(coeffs_);
    const double scale = 2.0 / domain_.width();
    for (auto& v : d) v *= scale;
    return ChebSeries(std::move(d), domain_, tail_tol_);
}

double ChebSeries::max_abs_coeff() const {
    double m = 0.0;
    for (double v : coeffs_) m = std::max(m, std::abs(v));
    return m;
}

double ChebSeries::sup_norm(int samples) const {
    double m = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double x = domain_.lo + domain_.width() * i / samples;
        m = std::max(m, std::abs(eval_unclamped(x)));
    }
    return m;
}

void ChebSeries::check_resolution() {
    const double m = max_abs_coeff();
    const size_t n = coeffs_.size();
    if (n < 3 || m == 0.0) {
        resolved_ = true;
        return;
    }
    resolved_ = std::abs(coeffs_[n - 1]) < tail_tol_ * m &&
                std::abs(coeffs_[n - 2]) < tail_tol_ * m;
}

ChebSeries2D::ChebSeries2D() : coeffs_(Eigen::MatrixXd::Zero(1, 1)) {}

ChebSeries2D::ChebSeries2D(Eigen::MatrixXd coeffs, Box domain, double tail_tol)
    : coeffs_(std::move(coeffs)), domain_(domain), tail_tol_(tail_tol) {
    if (coeffs_.size() == 0) coeffs_ = Eigen::MatrixXd::Zero(1, 1);
    if (!(domain_.x.width() > 0.0) || !(domain_.y.width() > 0.0))
        throw DomainError("ChebSeries2D: empty box");
    check_resolution();
}

ChebSeries2D ChebSeries2D::fit(
    const std::function<double(double, double)>& sampler, Box domain,
    int degree_x, int degree_y, double tail_tol) {
    if (degree_x < 1 || degree_y < 1)
        throw DomainError("ChebSeries2D::fit: degrees must be >= 1");
    auto xs = cheb_nodes(domain.x, degree_x);
    auto ys = cheb_nodes(domain.y, degree_y);
    // Sample on the tensor grid, transform rows then columns.
    Eigen::MatrixXd vals(degree_x + 1, degree_y + 1);
    for (int i = 0; i <= degree_x; ++i)
        for (int j = 0; j <= degree_y; ++j) vals(i, j) = sampler(xs[i], ys[j]);
    Eigen::MatrixXd half(degree_x + 1, degree_y + 1);
    std::vector<double> buf;
    for (int i = 0; i <= degree_x; ++i) {
        buf.assign(vals.row(i).begin(), vals.row(i).end());
        auto c = nodes_to_coeffs(buf);
        for (int j = 0; j <= degree_y; ++j) half(i, j) = c[j];
    }
    Eigen::MatrixXd out(degree_x + 1, degree_y + 1);
    for (int j = 0; j <= degree_y; ++j) {
        buf.assign(half.col(j).begin(), half.col(j).end());
        auto c = nodes_to_coeffs(buf);
        for (int i = 0; i <= degree_x; ++i) out(i, j) = c[i];
    }
    return ChebSeries2D(std::move(out), domain, tail_tol);
}

ChebSeries2D ChebSeries2D::zero(Box domain) {
    return ChebSeries2D(Eigen::MatrixXd::Zero(1, 1), domain);
}

double ChebSeries2D::operator()(double x, double y) const {
    const double tx = 1e-12 * std::max(1.0, domain_.x.width());
    const double ty = 1e-12 * std::max(1.0, domain_.y.width());
    if (!domain_.x.contains(x, tx) || !domain_.y.contains(y, ty))
        throw DomainError("ChebSeries2D: point outside box");
    x = std::clamp(x, domain_.x.lo, domain_.x.hi);
    y = std::clamp(y, domain_.y.lo, domain_.y.hi);
    return eval_unclamped(x, y);
}

double ChebSeries2D::eval_unclamped(double x, double y) const {
    const double ty = (2.0 * y - domain_.y.lo - domain_.y.hi) / domain_.y.width();
    // Collapse y per x-row, then Clenshaw in x.
    std::vector<double> row(coeffs_.cols()), bx(coeffs_.rows());
    for (Eigen::Index i = 0; i < coeffs_.rows(); ++i) {
        row.assign(coeffs_.row(i).begin(), coeffs_.row(i).end());
        bx[i] = clenshaw(row, ty);
    }
    const double tx = (2.0 * x - domain_.x.lo - domain_.x.hi) / domain_.x.width();
    return clenshaw(bx, tx);
}

ChebSeries2D ChebSeries2D::derivative_x() const {
    const Eigen::Index rows = std::max<Eigen::Index>(coeffs_.rows() - 1, 1);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, coeffs_.cols());
    std::vector<double> col(coeffs_.rows());
    const double scale = 2.0 / domain_.x.width();
    for (Eigen::Index j = 0; j < coeffs_.cols(); ++j) {
        col.assign(coeffs_.col(j).begin(), coeffs_.col(j).end());
        auto d = diff_coeffs(col);
        for (size_t i = 0; i < d.size(); ++i) out(i, j) = d[i] * scale;
    }
    return ChebSeries2D(std::move(out), domain_, tail_tol_);
}

ChebSeries2D ChebSeries2D::derivative_y() const {
    const Eigen::Index cols = std::max<Eigen::Index>(coeffs_.cols() - 1, 1);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(coeffs_.rows(), cols);
    std::vector<double> row(coeffs_.cols());
    const double scale = 2.0 / domain_.y.width();
    for (Eigen::Index i = 0; i < coeffs_.rows(); ++i) {
        row.assign(coeffs_.row(i).begin(), coeffs_.row(i).end());
        auto d = diff_coeffs(row);
        for (size_t j = 0; j < d.size(); ++j) out(i, j) = d[j] * scale;
    }
    return ChebSeries2D(std::move(out), domain_, tail_tol_);
}

ChebSeries ChebSeries2D::slice_y(double y) const {
    const double ty = (2.0 * y - domain_.y.lo - domain_.y.hi) / domain_.y.width();
    std::vector<double> c(coeffs_.rows()), row(coeffs_.cols());
    for (Eigen::Index i = 0; i < coeffs_.rows(); ++i) {
        row.assign(coeffs_.row(i).begin(), coeffs_.row(i).end());
        c[i] = clenshaw(row, ty);
    }
    return ChebSeries(std::move(c), domain_.x, tail_tol_);
}

bool ChebSeries2D::is_zero() const { return max_abs_coeff() == 0.0; }

double ChebSeries2D::max_abs_coeff() const {
    return coeffs_.size() == 0 ? 0.0 : coeffs_.cwiseAbs().maxCoeff();
}

double ChebSeries2D::sup_norm(int nx, int ny) const {
    double m = 0.0;
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j) {
            double x = domain_.x.lo + domain_.x.width() * i / nx;
            double y = domain_.y.lo + domain_.y.width() * j / ny;
            m = std::max(m, std::abs(eval_unclamped(x, y)));
        }
    return m;
}

void ChebSeries2D::check_resolution() {
    const double m = max_abs_coeff();
    if (m == 0.0 || (coeffs_.rows() < 3 && coeffs_.cols() < 3)) {
        resolved_ = true;
        return;
    }
    double tail = 0.0;
    if (coeffs_.rows() >= 3)
        tail = std::max(tail,
                        coeffs_.bottomRows(2).cwiseAbs().maxCoeff());
    if (coeffs_.cols() >= 3)
        tail = std::max(tail,
                        coeffs_.rightCols(2).cwiseAbs().maxCoeff());
    resolved_ = tail < tail_tol_ * m;
}

ChebSeries compose(const ChebSeries& outer, const ChebSeries& inner,
                   int degree) {
    if (degree < 0) {
        degree = std::clamp(outer.degree() + inner.degree(), 8, 96);
    }
    const Interval od = outer.domain();
    const double slack = 1e-9 * std::max(1.0, od.width());
    const Interval dom = inner.domain();
    auto sampler = [&](double x) {
        double v = inner.eval_unclamped(x);
        if (!od.contains(v, slack))
            throw CompositionError(
                "compose: inner value " + std::to_string(v) +
                " escapes outer domain [" + std::to_string(od.lo) + ", " +
                std::to_string(od.hi) + "]");
        return outer.eval_unclamped(std::clamp(v, od.lo, od.hi));
    };
    ChebSeries out = ChebSeries::fit(sampler, dom, degree, outer.tail_tol());
    if (!out.resolved() && degree < 128)
        out = ChebSeries::fit(sampler, dom, std::min(2 * degree, 128),
                              outer.tail_tol());
    return out;
}

double invert_monotone(const ChebSeries& s, double y, Interval bracket) {
    double flo = s.eval_unclamped(bracket.lo);
    double fhi = s.eval_unclamped(bracket.hi);
    int dir = flo < fhi ? 1 : -1;
    {
        // Monotonicity precondition, sampled.
        const int n = 64;
        double prev = flo;
        for (int i = 1; i <= n; ++i) {
            double x = bracket.lo + bracket.width() * i / n;
            double v = s.eval_unclamped(x);
            if (dir * (v - prev) < 0.0)
                throw MonotoneError("invert_monotone: series not monotone on bracket");
            prev = v;
        }
    }
    double scale = std::max({1.0, std::abs(flo), std::abs(fhi)});
    const double vtol = 1e-13 * scale;
    if (dir * (y - flo) < -1e-9 * scale || dir * (fhi - y) < -1e-9 * scale)
        throw MonotoneError("invert_monotone: value " + std::to_string(y) +
                            " outside range");
    double lo = bracket.lo, hi = bracket.hi;
    ChebSeries ds = s.derivative();
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        double v = s.eval_unclamped(x) - y;
        if (std::abs(v) < vtol) return x;
        if (dir * v > 0.0)
            hi = x;
        else
            lo = x;
        double d = ds.eval_unclamped(x);
        double step = d != 0.0 ? v / d : 0.0;
        double xn = x - step;
        if (step == 0.0 || xn <= lo || xn >= hi) xn = 0.5 * (lo + hi);
        if (hi - lo < 1e-16 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

ChebSeries nonlinearity(const ChebSeries& s) {
    ChebSeries d1 = s.derivative();
    ChebSeries d2 = d1.derivative();
    const Interval dom = s.domain();
    const int n = 128;
    for (int i = 0; i <= n; ++i) {
        double x = dom.lo + dom.width() * i / n;
        if (std::abs(d1.eval_unclamped(x)) < 1e-12 * std::max(1.0, d1.sup_norm()))
            throw SingularityError("nonlinearity: derivative vanishes on domain");
    }
    return ChebSeries::fit(
        [&](double x) {
            return d2.eval_unclamped(x) / d1.eval_unclamped(x);
        },
        dom, std::max(2 * s.degree(), 8), s.tail_tol());
}

ChebSeries affine_conjugate(const ChebSeries& f, const AffineMap& a,
                            Interval new_domain, int degree) {
    if (degree < 0) degree = f.degree();
    const AffineMap ai = a.inverse();
    return ChebSeries::fit(
        [&](double x) { return a(f.eval_unclamped(ai(x))); }, new_domain,
        degree, f.tail_tol());
}

}  // namespace renormlab
