#pragma once

#include <Eigen/Dense>

#include <vector>

namespace nozzle::detail {

// Quadratic interpolant m(z) = c + g.(z - z0) + 1/2 (z - z0)^T H (z - z0)
// whose Hessian differs from a previous one by the least Frobenius norm.
class QuadraticModel {
public:
    // points are absolute; z0 is the expansion point. With fewer than
    // (n+1)(n+2)/2 points the Hessian change is the minimum-norm one.
    void build(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& values,
               const Eigen::VectorXd& z0, const Eigen::MatrixXd& hessian_prev);

    double value(const Eigen::VectorXd& z) const;
    const Eigen::VectorXd& gradient() const { return g_; }
    const Eigen::MatrixXd& hessian() const { return H_; }
    // Value at z of the minimum-norm Lagrange function of point k.
    double lagrange(std::size_t k, const Eigen::VectorXd& z) const;
    // max_k |m(z_k) - f_k| / max(1, |f_k|) over the interpolation points.
    double mismatch() const { return mismatch_; }

private:
    Eigen::VectorXd kkt_rhs(const Eigen::VectorXd& z) const;

    Eigen::VectorXd z0_, g_;
    Eigen::MatrixXd H_;
    double c_ = 0.0, mismatch_ = 0.0, scale_ = 1.0;
    std::vector<Eigen::VectorXd> y_;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> kkt_;
};

}  // namespace nozzle::detail
