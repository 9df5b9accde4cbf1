#include "quadratic_model.hpp"

#include <algorithm>
#include <cmath>

namespace nozzle::detail {

void QuadraticModel::build(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& values,
                           const Eigen::VectorXd& z0, const Eigen::MatrixXd& hessian_prev) {
    const auto m = static_cast<Eigen::Index>(points.size());
    const Eigen::Index n = z0.size();
    z0_ = z0;
    // Work in coordinates scaled by the set radius so the KKT matrix stays well conditioned.
    scale_ = 0.0;
    for (const auto& p : points) scale_ = std::max(scale_, (p - z0).norm());
    if (scale_ == 0.0) scale_ = 1.0;
    y_.clear();
    for (const auto& p : points) y_.push_back((p - z0) / scale_);

    // KKT system of  min ||D||_F  s.t.  c + g.y_k + 1/2 y_k^T (H_prev + D) y_k = f_k,
    // with D = sum_j lambda_j y_j y_j^T.
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(m + n + 1, m + n + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& yi = y_[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m; ++j) {
            const double d = yi.dot(y_[static_cast<std::size_t>(j)]);
            W(i, j) = 0.5 * d * d;
        }
        W(i, m) = W(m, i) = 1.0;
        W.block(i, m + 1, 1, n) = yi.transpose();
        W.block(m + 1, i, n, 1) = yi;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + n + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& yi = y_[static_cast<std::size_t>(i)];
        rhs[i] = values[static_cast<std::size_t>(i)] - 0.5 * scale_ * scale_ * yi.dot(hessian_prev * yi);
    }
    kkt_.compute(W);
    const Eigen::VectorXd sol = kkt_.solve(rhs);
    c_ = sol[m];
    g_ = sol.segment(m + 1, n) / scale_;
    H_ = hessian_prev;
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& yj = y_[static_cast<std::size_t>(j)];
        H_ += (sol[j] / (scale_ * scale_)) * yj * yj.transpose();
    }
    mismatch_ = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const double f = values[k];
        mismatch_ = std::max(mismatch_, std::abs(value(points[k]) - f) / std::max(1.0, std::abs(f)));
    }
}

double QuadraticModel::value(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd y = z - z0_;
    return c_ + g_.dot(y) + 0.5 * y.dot(H_ * y);
}

Eigen::VectorXd QuadraticModel::kkt_rhs(const Eigen::VectorXd& z) const {
    const auto m = static_cast<Eigen::Index>(y_.size());
    const Eigen::Index n = z0_.size();
    const Eigen::VectorXd y = (z - z0_) / scale_;
    Eigen::VectorXd r(m + n + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = y_[static_cast<std::size_t>(i)].dot(y);
        r[i] = 0.5 * d * d;
    }
    r[m] = 1.0;
    r.tail(n) = y;
    return r;
}

double QuadraticModel::lagrange(std::size_t k, const Eigen::VectorXd& z) const {
    return kkt_.solve(kkt_rhs(z))[static_cast<Eigen::Index>(k)];
}

}  // namespace nozzle::detail
