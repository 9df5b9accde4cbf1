#include "nozzle/errors.hpp"
#include "nozzle/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace nozzle {

namespace {

constexpr double kEndTol = 1e-9;

// 8-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 8> kGaussX = {0.019855071751231856, 0.10166676129318664,
                                           0.2372337950418355,   0.4082826787521751,
                                           0.5917173212478249,   0.7627662049581645,
                                           0.8983332387068134,   0.9801449282487681};
constexpr std::array<double, 8> kGaussW = {0.05061426814518813, 0.11119051722668724,
                                           0.15685332293894363, 0.18134189168918100,
                                           0.18134189168918100, 0.15685332293894363,
                                           0.11119051722668724, 0.05061426814518813};

}  // namespace

BoundaryProfile::BoundaryProfile(std::vector<Segment> segments, Markers markers)
    : segments_(std::move(segments)), markers_(markers) {
    if (segments_.empty()) throw GeometryInfeasible("profile has no segments");
    for (const auto& seg : segments_) {
        if (const auto* c = std::get_if<Curve>(&seg)) {
            std::vector<double> cx, cy;
            for (const auto& p : c->ctrl) {
                cx.push_back(p.x);
                cy.push_back(p.y);
            }
            curve_index_.push_back(static_cast<int>(curves_.size()));
            curves_.emplace_back(std::move(cx), std::move(cy), c->degree);
        } else {
            curve_index_.push_back(-1);
        }
    }
}

Point2 BoundaryProfile::point_on(std::size_t seg, double t) const {
    const auto& s = segments_.at(seg);
    if (const auto* l = std::get_if<Line>(&s)) {
        return {l->a.x + t * (l->b.x - l->a.x), l->a.y + t * (l->b.y - l->a.y)};
    }
    Point2 p;
    curves_[static_cast<std::size_t>(curve_index_[seg])].evaluate(t, p.x, p.y);
    return p;
}

double BoundaryProfile::radius(double x) const {
    x = std::clamp(x, 0.0, markers_.outlet);
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (const auto* l = std::get_if<Line>(&s)) {
            if (l->b.x <= l->a.x) continue;  // vertical step
            if (x >= l->a.x && x <= l->b.x) {
                const double t = (x - l->a.x) / (l->b.x - l->a.x);
                return l->a.y + t * (l->b.y - l->a.y);
            }
        } else {
            const auto& c = std::get<Curve>(s);
            if (x >= c.ctrl.front().x && x <= c.ctrl.back().x) {
                return curves_[static_cast<std::size_t>(curve_index_[i])].y_at_x(x);
            }
        }
    }
    // Only reachable through rounding at a segment join.
    return std::get<Line>(segments_.back()).b.y;
}

std::vector<Point2> BoundaryProfile::polyline(double max_spacing) const {
    if (!(max_spacing > 0.0)) throw DomainError("polyline spacing must be > 0");
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (pts.empty()) pts.push_back(point_on(i, 0.0));
        if (const auto* l = std::get_if<Line>(&s)) {
            const double len = std::hypot(l->b.x - l->a.x, l->b.y - l->a.y);
            const int n = std::max(1, static_cast<int>(std::ceil(len / max_spacing - 1e-12)));
            for (int k = 1; k <= n; ++k) pts.push_back(point_on(i, static_cast<double>(k) / n));
        } else {
            // Equal arc-length stations from a dense chord table.
            constexpr int kDense = 4096;
            std::vector<double> cum(kDense + 1, 0.0);
            Point2 prev = point_on(i, 0.0);
            for (int k = 1; k <= kDense; ++k) {
                const Point2 q = point_on(i, static_cast<double>(k) / kDense);
                cum[static_cast<std::size_t>(k)] = cum[static_cast<std::size_t>(k - 1)] + std::hypot(q.x - prev.x, q.y - prev.y);
                prev = q;
            }
            const double len = cum.back();
            const int n = std::max(1, static_cast<int>(std::ceil(len / max_spacing - 1e-12)));
            for (int k = 1; k < n; ++k) {
                const double target = len * k / n;
                const auto it = std::lower_bound(cum.begin(), cum.end(), target);
                const auto j = static_cast<int>(it - cum.begin());
                const double c0 = cum[static_cast<std::size_t>(j - 1)];
                const double c1 = cum[static_cast<std::size_t>(j)];
                const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
                pts.push_back(point_on(i, (j - 1 + frac) / kDense));
            }
            pts.push_back(point_on(i, 1.0));
        }
    }
    return pts;
}

double BoundaryProfile::area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        if (const auto* l = std::get_if<Line>(&s)) {
            a += 0.5 * (l->a.y + l->b.y) * (l->b.x - l->a.x);
        } else {
            // Integral of y dx = y(t) x'(t) dt, piecewise polynomial between knots.
            const auto& curve = curves_[static_cast<std::size_t>(curve_index_[i])];
            const auto& k = curve.knots();
            for (std::size_t j = 0; j + 1 < k.size(); ++j) {
                const double t0 = k[j], t1 = k[j + 1];
                if (t1 <= t0) continue;
                for (std::size_t q = 0; q < kGaussX.size(); ++q) {
                    const double t = t0 + (t1 - t0) * kGaussX[q];
                    double x = 0, y = 0, dx = 0, dy = 0;
                    curve.evaluate(t, x, y);
                    curve.derivative(t, dx, dy);
                    a += kGaussW[q] * (t1 - t0) * y * dx;
                }
            }
        }
    }
    return a;
}

BoundaryProfile build_angle_profile(const NozzleDims& dims, double alpha_deg) {
    dims.validate();
    const double lt = taper_length(dims, alpha_deg);
    const double x_end = dims.L_total - dims.L_out;
    const double x_start = x_end - lt;
    if (x_start < 0.0) {
        throw GeometryInfeasible("taper of " + std::to_string(lt) + " mm at " + std::to_string(alpha_deg) +
                                 " deg does not fit in L_total");
    }
    std::vector<BoundaryProfile::Segment> segs;
    if (x_start > 0.0) segs.push_back(BoundaryProfile::Line{{0.0, dims.r_in()}, {x_start, dims.r_in()}});
    segs.push_back(BoundaryProfile::Line{{x_start, dims.r_in()}, {x_end, dims.r_out()}});
    segs.push_back(BoundaryProfile::Line{{x_end, dims.r_out()}, {dims.L_total, dims.r_out()}});
    return BoundaryProfile(std::move(segs), {0.0, x_start, x_end, dims.L_total});
}

std::vector<double> monotonicity_constraints(const SplineParams& params) {
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < params.y_ctrl.size(); ++i) r.push_back(params.y_ctrl[i] - params.y_ctrl[i + 1]);
    return r;
}

bool monotonicity_feasible(const SplineParams& params, double margin) {
    const auto r = monotonicity_constraints(params);
    return std::all_of(r.begin(), r.end(), [&](double v) { return v > margin; });
}

BoundaryProfile build_spline_profile(const NozzleDims& dims, const SplineParams& params) {
    dims.validate();
    const auto& y = params.y_ctrl;
    const int n = static_cast<int>(y.size());
    if (params.degree < 1 || n < params.degree + 1) {
        throw ConstraintViolated("spline needs at least degree+1 control points");
    }
    if (!monotonicity_feasible(params, 0.0)) {
        throw ConstraintViolated("control-point ordinates must strictly decrease along the nozzle");
    }
    if (std::abs(y.front() - dims.r_in()) > kEndTol || std::abs(y.back() - dims.r_out()) > kEndTol) {
        throw ConstraintViolated("first and last ordinates must equal the inlet and outlet radii");
    }
    const double lt = taper_length(dims, params.alpha_scale_deg);
    if (!(lt > 0.0)) throw GeometryInfeasible("spline taper needs a half-angle below 90 deg");
    const double x_end = dims.L_total - dims.L_out;
    const double x_start = x_end - lt;
    if (x_start < 0.0) throw GeometryInfeasible("spline taper does not fit in L_total");

    BoundaryProfile::Curve curve;
    curve.degree = params.degree;
    for (int i = 0; i < n; ++i) {
        const double x = i == n - 1 ? x_end : x_start + lt * static_cast<double>(i) / static_cast<double>(n - 1);
        curve.ctrl.push_back({x, y[static_cast<std::size_t>(i)]});
    }
    curve.ctrl.front().y = dims.r_in();
    curve.ctrl.back().y = dims.r_out();

    std::vector<BoundaryProfile::Segment> segs;
    if (x_start > 0.0) segs.push_back(BoundaryProfile::Line{{0.0, dims.r_in()}, {x_start, dims.r_in()}});
    segs.push_back(std::move(curve));
    segs.push_back(BoundaryProfile::Line{{x_end, dims.r_out()}, {dims.L_total, dims.r_out()}});
    return BoundaryProfile(std::move(segs), {0.0, x_start, x_end, dims.L_total});
}

BoundaryProfile build_profile(const NozzleDims& dims, const ProfileParams& params) {
    return std::visit(
        [&](const auto& p) -> BoundaryProfile {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AngleParams>) {
                return build_angle_profile(dims, p.alpha_deg);
            } else {
                return build_spline_profile(dims, p);
            }
        },
        params);
}

BoundaryProfile build_straight_profile(double length, double radius) {
    if (!(length > 0.0) || !(radius > 0.0)) throw GeometryInfeasible("straight channel needs positive size");
    std::vector<BoundaryProfile::Segment> segs{BoundaryProfile::Line{{0.0, radius}, {length, radius}}};
    return BoundaryProfile(std::move(segs), {0.0, length, length, length});
}

}  // namespace nozzle
