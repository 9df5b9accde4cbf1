#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "nozzle/bspline.hpp"

namespace nozzle {

// Fixed nozzle dimensions in millimetres. Defaults are a standard FDM nozzle.
struct NozzleDims {
    double L_total = 18.0;
    double L_heat = 14.66;
    double L_out = 0.9;
    double L_pressure = 1.0;
    double d_in = 3.2;
    double d_out = 0.5;

    double r_in() const { return 0.5 * d_in; }
    double r_out() const { return 0.5 * d_out; }

    // Empty when all invariants hold; otherwise one message per violated field.
    std::vector<std::string> violations() const;
    void validate() const;  // throws ValidationError
};

inline constexpr double kMinHalfAngleDeg = 5.0;
inline constexpr double kMaxHalfAngleDeg = 90.0;
// Minimum decrease between consecutive control-point ordinates [mm].
inline constexpr double kMonotonicityMargin = 1e-3;

struct AngleParams {
    double alpha_deg = 30.0;
};

// Spline parametrization: one angle sets every control-point abscissa, the
// ordinates move individually. y_ctrl holds all ordinates including the two
// end points, which must sit on the inlet radius and outlet radius.
struct SplineParams {
    double alpha_scale_deg = 30.0;
    std::vector<double> y_ctrl;
    int degree = 3;
};

using ProfileParams = std::variant<AngleParams, SplineParams>;

// Axial length of the straight taper from r_in to r_out at the given half-angle.
double taper_length(const NozzleDims& dims, double alpha_deg);

// Ordinates on the straight taper of the given angle, uniformly spaced in x.
std::vector<double> taper_ordinates(const NozzleDims& dims, std::size_t n_ctrl);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};


// Wall of the half-domain: r(x) for x in [0, L_total]. A profile is a chain of
// segments (straight lines or one B-spline) from (0, r_in) to (L_total, r_out).
// A step contraction is a vertical line segment; r(x) is then the upper value
// at the step abscissa.
class BoundaryProfile {
public:
    struct Line {
        Point2 a, b;
    };
    struct Curve {
        std::vector<Point2> ctrl;
        int degree = 3;
    };
    using Segment = std::variant<Line, Curve>;

    struct Markers {
        double inlet = 0.0;
        double contraction_start = 0.0;
        double contraction_end = 0.0;
        double outlet = 0.0;
    };

    BoundaryProfile(std::vector<Segment> segments, Markers markers);

    double radius(double x) const;
    double length() const { return markers_.outlet; }
    const Markers& markers() const { return markers_; }
    const std::vector<Segment>& segments() const { return segments_; }

    // Point on segment `seg` at curve parameter t in [0,1].
    Point2 point_on(std::size_t seg, double t) const;
    // Wall point at abscissa x (vertical segments are not addressable by x).
    Point2 wall_point(double x) const { return {x, radius(x)}; }

    // Dense polyline of the wall, exact at segment ends; spacing <= max_spacing.
    std::vector<Point2> polyline(double max_spacing) const;

    // Analytic domain area of the half-domain, integral of r(x) dx.
    double area() const;

private:
    std::vector<Segment> segments_;
    Markers markers_;
    std::vector<BSplineCurve> curves_;  // one per Curve segment, same order
    std::vector<int> curve_index_;      // per segment, index into curves_ or -1
};

BoundaryProfile build_angle_profile(const NozzleDims& dims, double alpha_deg);
BoundaryProfile build_spline_profile(const NozzleDims& dims, const SplineParams& params);
BoundaryProfile build_profile(const NozzleDims& dims, const ProfileParams& params);
// Straight channel of constant radius, used for verification flows.
BoundaryProfile build_straight_profile(double length, double radius);

// residual_i = y_i - y_{i+1}; feasible iff every residual exceeds the margin.
std::vector<double> monotonicity_constraints(const SplineParams& params);
bool monotonicity_feasible(const SplineParams& params, double margin = kMonotonicityMargin);

// Plain-text polyline "x r" per line, millimetres, 1e-6 precision.
void write_profile_polyline(std::ostream& os, const BoundaryProfile& profile, double spacing = 0.01);
void write_profile_polyline(const std::string& path, const BoundaryProfile& profile, double spacing = 0.01);

}  // namespace nozzle
