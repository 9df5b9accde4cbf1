#pragma once

#include <Eigen/Dense>

namespace nozzle::detail {

// min g^T s + 1/2 s^T H s  s.t.  l <= s <= u,  C s >= d.
// s = 0 must be feasible. H may be indefinite: the convexified problem is
// solved by a primal active-set method and compared with steps along
// negative-curvature directions; the best point under the true model wins.
Eigen::VectorXd solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                             const Eigen::VectorXd& u, const Eigen::MatrixXd& C, const Eigen::VectorXd& d);

// Largest t >= 0 with l <= s + t p <= u and C (s + t p) >= d, capped at t_max.
double max_feasible_step(const Eigen::VectorXd& s, const Eigen::VectorXd& p, const Eigen::VectorXd& l,
                         const Eigen::VectorXd& u, const Eigen::MatrixXd& C, const Eigen::VectorXd& d, double t_max);

}  // namespace nozzle::detail
