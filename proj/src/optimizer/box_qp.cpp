#include "box_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nozzle::detail {

namespace {

// Constraint i of the stacked system G s >= h (bounds first, then general rows).
struct Stacked {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
};

Stacked stack(const Eigen::VectorXd& l, const Eigen::VectorXd& u, const Eigen::MatrixXd& C, const Eigen::VectorXd& d) {
    const Eigen::Index n = l.size(), m = C.rows();
    Stacked s;
    s.G = Eigen::MatrixXd::Zero(2 * n + m, n);
    s.h.resize(2 * n + m);
    for (Eigen::Index i = 0; i < n; ++i) {
        s.G(i, i) = 1.0;
        s.h[i] = l[i];
        s.G(n + i, i) = -1.0;
        s.h[n + i] = -u[i];
    }
    if (m > 0) {
        s.G.bottomRows(m) = C;
        s.h.tail(m) = d;
    }
    return s;
}

double model(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& s) {
    return g.dot(s) + 0.5 * s.dot(H * s);
}

// Primal active-set method for a strictly convex QP from a feasible start.
Eigen::VectorXd active_set(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Stacked& c, Eigen::VectorXd s) {
    const Eigen::Index n = g.size();
    const double feas_tol = 1e-12;
    std::vector<Eigen::Index> work;
    for (Eigen::Index i = 0; i < c.G.rows(); ++i) {
        if (std::abs(c.G.row(i).dot(s) - c.h[i]) <= feas_tol && static_cast<Eigen::Index>(work.size()) < n) {
            // Keep the working set linearly independent.
            Eigen::MatrixXd A(static_cast<Eigen::Index>(work.size()) + 1, n);
            for (std::size_t k = 0; k < work.size(); ++k) A.row(static_cast<Eigen::Index>(k)) = c.G.row(work[k]);
            A.row(static_cast<Eigen::Index>(work.size())) = c.G.row(i);
            if (Eigen::FullPivLU<Eigen::MatrixXd>(A).rank() == A.rows()) work.push_back(i);
        }
    }
    for (int iter = 0; iter < 200; ++iter) {
        const auto k = static_cast<Eigen::Index>(work.size());
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
        K.topLeftCorner(n, n) = H;
        for (Eigen::Index j = 0; j < k; ++j) {
            K.block(0, n + j, n, 1) = -c.G.row(work[static_cast<std::size_t>(j)]).transpose();
            K.block(n + j, 0, 1, n) = -c.G.row(work[static_cast<std::size_t>(j)]);
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
        rhs.head(n) = -(g + H * s);
        const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
        const Eigen::VectorXd p = sol.head(n);
        if (p.norm() <= 1e-14 * (1.0 + s.norm())) {
            // Multipliers of G s >= h must be non-negative at the optimum.
            Eigen::Index drop = -1;
            double most = -1e-14;
            for (Eigen::Index j = 0; j < k; ++j) {
                if (sol[n + j] < most) {
                    most = sol[n + j];
                    drop = j;
                }
            }
            if (drop < 0) return s;
            work.erase(work.begin() + drop);
            continue;
        }
        double t = 1.0;
        Eigen::Index block = -1;
        for (Eigen::Index i = 0; i < c.G.rows(); ++i) {
            if (std::find(work.begin(), work.end(), i) != work.end()) continue;
            const double gp = c.G.row(i).dot(p);
            if (gp < -1e-300) {
                const double ti = (c.h[i] - c.G.row(i).dot(s)) / gp;
                if (ti < t) {
                    t = std::max(ti, 0.0);
                    block = i;
                }
            }
        }
        s += t * p;
        if (block >= 0) work.push_back(block);
    }
    return s;
}

}  // namespace

double max_feasible_step(const Eigen::VectorXd& s, const Eigen::VectorXd& p, const Eigen::VectorXd& l,
                         const Eigen::VectorXd& u, const Eigen::MatrixXd& C, const Eigen::VectorXd& d, double t_max) {
    double t = t_max;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (p[i] > 0.0) t = std::min(t, (u[i] - s[i]) / p[i]);
        else if (p[i] < 0.0) t = std::min(t, (l[i] - s[i]) / p[i]);
    }
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        const double cp = C.row(i).dot(p);
        if (cp < 0.0) t = std::min(t, (d[i] - C.row(i).dot(s)) / cp);
    }
    return std::max(t, 0.0);
}

Eigen::VectorXd solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                             const Eigen::VectorXd& u, const Eigen::MatrixXd& C, const Eigen::VectorXd& d) {
    const Eigen::Index n = g.size();
    const Stacked c = stack(l, u, C, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (H + H.transpose()));
    const double lmin = eig.eigenvalues().minCoeff();
    const double scale = std::max({H.cwiseAbs().maxCoeff(), g.norm() / std::max((u - l).maxCoeff(), 1e-300), 1e-300});
    const double shift = std::max(0.0, -lmin) + 1e-10 * scale;
    const Eigen::MatrixXd Hc = H + shift * Eigen::MatrixXd::Identity(n, n);

    std::vector<Eigen::VectorXd> candidates;
    candidates.push_back(active_set(Hc, g, c, Eigen::VectorXd::Zero(n)));
    // Steps to the boundary along the steepest-descent and negative-curvature directions.
    std::vector<Eigen::VectorXd> dirs{-g};
    for (Eigen::Index k = 0; k < n; ++k) {
        if (eig.eigenvalues()[k] < 0.0) {
            dirs.push_back(eig.eigenvectors().col(k));
            dirs.push_back(-eig.eigenvectors().col(k));
        }
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    for (const auto& p : dirs) {
        if (p.norm() == 0.0) continue;
        const double t = max_feasible_step(zero, p, l, u, C, d, 1e300);
        if (t <= 0.0 || !std::isfinite(t)) continue;
        Eigen::VectorXd s = t * p;
        // Refine from the boundary point with the convexified model.
        candidates.push_back(s);
        candidates.push_back(active_set(Hc, g, c, s));
    }
    Eigen::VectorXd best = zero;
    double fbest = 0.0;
    for (const auto& s : candidates) {
        const double f = model(H, g, s);
        if (f < fbest) {
            fbest = f;
            best = s;
        }
    }
    return best;
}

}  // namespace nozzle::detail
