#pragma once

#include <vector>

namespace nozzle {

struct Point2;

// Open-clamped B-spline with a uniform interior knot vector; the curve
// interpolates its first and last control points.
class BSplineCurve {
public:
    BSplineCurve(std::vector<double> cx, std::vector<double> cy, int degree);

    int degree() const { return degree_; }
    std::size_t size() const { return cx_.size(); }

    // Curve point at parameter t in [0, 1].
    void evaluate(double t, double& x, double& y) const;
    // First derivative with respect to t.
    void derivative(double t, double& dx, double& dy) const;

    // For curves whose x(t) is strictly increasing: the parameter with x(t) = x.
    double parameter_at_x(double x) const;
    double y_at_x(double x) const;

    const std::vector<double>& knots() const { return knots_; }

private:
    double de_boor(const std::vector<double>& coef, int p, const std::vector<double>& knots,
                   double t) const;
    int find_span(const std::vector<double>& knots, int n_ctrl, int p, double t) const;

    std::vector<double> cx_, cy_;
    int degree_;
    std::vector<double> knots_;
    // Control points and knots of the derivative curve.
    std::vector<double> dcx_, dcy_, dknots_;
};

}  // namespace nozzle
