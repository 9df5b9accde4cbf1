#include "nozzle/bspline.hpp"

#include "nozzle/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nozzle {

namespace {

std::vector<double> clamped_uniform_knots(int n_ctrl, int p) {
    std::vector<double> k(static_cast<std::size_t>(n_ctrl + p + 1));
    const int n_inner = n_ctrl - p - 1;
    for (int i = 0; i <= p; ++i) {
        k[static_cast<std::size_t>(i)] = 0.0;
        k[static_cast<std::size_t>(n_ctrl + i)] = 1.0;
    }
    for (int j = 1; j <= n_inner; ++j) {
        k[static_cast<std::size_t>(p + j)] = static_cast<double>(j) / static_cast<double>(n_inner + 1);
    }
    return k;
}

}  // namespace

BSplineCurve::BSplineCurve(std::vector<double> cx, std::vector<double> cy, int degree)
    : cx_(std::move(cx)), cy_(std::move(cy)), degree_(degree) {
    if (cx_.size() != cy_.size()) throw DomainError("B-spline: coordinate count mismatch");
    if (degree_ < 1) throw DomainError("B-spline: degree must be >= 1");
    if (cx_.size() < static_cast<std::size_t>(degree_ + 1)) {
        throw DomainError("B-spline: need at least degree+1 control points");
    }
    const int n = static_cast<int>(cx_.size());
    knots_ = clamped_uniform_knots(n, degree_);

    // Derivative curve: degree p-1 with control points p (P_{i+1} - P_i) / (u_{i+p+1} - u_{i+1}).
    dcx_.resize(static_cast<std::size_t>(n - 1));
    dcy_.resize(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n - 1; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double den = knots_[ui + static_cast<std::size_t>(degree_) + 1] - knots_[ui + 1];
        const double f = den > 0.0 ? degree_ / den : 0.0;
        dcx_[ui] = f * (cx_[ui + 1] - cx_[ui]);
        dcy_[ui] = f * (cy_[ui + 1] - cy_[ui]);
    }
    dknots_.assign(knots_.begin() + 1, knots_.end() - 1);
}

int BSplineCurve::find_span(const std::vector<double>& knots, int n_ctrl, int p, double t) const {
    if (t >= knots[static_cast<std::size_t>(n_ctrl)]) return n_ctrl - 1;
    if (t <= knots[static_cast<std::size_t>(p)]) return p;
    auto it = std::upper_bound(knots.begin() + p, knots.begin() + n_ctrl + 1, t);
    return static_cast<int>(it - knots.begin()) - 1;
}

double BSplineCurve::de_boor(const std::vector<double>& coef, int p, const std::vector<double>& knots,
                             double t) const {
    const int n = static_cast<int>(coef.size());
    if (p == 0) {
        const int k = find_span(knots, n, 0, t);
        return coef[static_cast<std::size_t>(k)];
    }
    const int k = find_span(knots, n, p, t);
    std::vector<double> d(static_cast<std::size_t>(p + 1));
    for (int j = 0; j <= p; ++j) d[static_cast<std::size_t>(j)] = coef[static_cast<std::size_t>(j + k - p)];
    for (int r = 1; r <= p; ++r) {
        for (int j = p; j >= r; --j) {
            const auto i = static_cast<std::size_t>(j + k - p);
            const double den = knots[i + static_cast<std::size_t>(p - r) + 1] - knots[i];
            const double a = den > 0.0 ? (t - knots[i]) / den : 0.0;
            const auto uj = static_cast<std::size_t>(j);
            d[uj] = (1.0 - a) * d[uj - 1] + a * d[uj];
        }
    }
    return d[static_cast<std::size_t>(p)];
}

void BSplineCurve::evaluate(double t, double& x, double& y) const {
    t = std::clamp(t, 0.0, 1.0);
    x = de_boor(cx_, degree_, knots_, t);
    y = de_boor(cy_, degree_, knots_, t);
}

void BSplineCurve::derivative(double t, double& dx, double& dy) const {
    t = std::clamp(t, 0.0, 1.0);
    dx = de_boor(dcx_, degree_ - 1, dknots_, t);
    dy = de_boor(dcy_, degree_ - 1, dknots_, t);
}

double BSplineCurve::parameter_at_x(double x) const {
    if (x <= cx_.front()) return 0.0;
    if (x >= cx_.back()) return 1.0;
    // x(t) is monotone: safeguarded Newton inside a shrinking bracket.
    double lo = 0.0, hi = 1.0;
    double t = (x - cx_.front()) / (cx_.back() - cx_.front());
    const double scale = std::max(1.0, std::abs(cx_.back()) + std::abs(cx_.front()));
    for (int it = 0; it < 200; ++it) {
        double xt = 0.0, yt = 0.0, dx = 0.0, dy = 0.0;
        evaluate(t, xt, yt);
        const double f = xt - x;
        if (std::abs(f) <= 1e-15 * scale) break;
        if (f > 0.0) hi = t; else lo = t;
        derivative(t, dx, dy);
        double tn = dx > 0.0 ? t - f / dx : 0.5 * (lo + hi);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        if (hi - lo < 1e-17) break;
        t = tn;
    }
    return t;
}

double BSplineCurve::y_at_x(double x) const {
    double xt = 0.0, yt = 0.0;
    evaluate(parameter_at_x(x), xt, yt);
    return yt;
}

}  // namespace nozzle
