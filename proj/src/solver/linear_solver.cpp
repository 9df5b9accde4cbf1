#include "linear_solver.hpp"

#include "nozzle/errors.hpp"

#include <cmath>

#ifdef NOZZLE_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

namespace nozzle::detail {

struct LinearSolver::Impl {
#ifdef NOZZLE_HAVE_UMFPACK
    Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
    Eigen::SparseMatrix<double> scaled;
    Eigen::VectorXd row, col;
    Eigen::Index nnz = -1, n = -1;
    std::vector<int> outer;
    std::vector<int> inner;
    Eigen::SparseMatrix<double> A;  // unscaled copy for refinement
};

LinearSolver::LinearSolver() : impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;

const char* LinearSolver::backend() {
#ifdef NOZZLE_HAVE_UMFPACK
    return "umfpack";
#else
    return "eigen-sparselu";
#endif
}

void LinearSolver::factorize(const Eigen::SparseMatrix<double>& A) {
    auto& s = *impl_;
    const Eigen::Index n = A.rows();
    // One pass of row then column max-norm scaling.
    s.row = Eigen::VectorXd::Zero(n);
    s.col = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            s.row[it.row()] = std::max(s.row[it.row()], std::abs(it.value()));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) s.row[i] = s.row[i] > 0.0 ? 1.0 / s.row[i] : 1.0;
    for (Eigen::Index k = 0; k < A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            s.col[it.col()] = std::max(s.col[it.col()], std::abs(it.value() * s.row[it.row()]));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) s.col[i] = s.col[i] > 0.0 ? 1.0 / s.col[i] : 1.0;
    s.scaled = s.row.asDiagonal() * A * s.col.asDiagonal();
    s.scaled.makeCompressed();
    s.A = A;

    const bool same_pattern = s.n == n && s.nnz == s.scaled.nonZeros() &&
                              std::equal(s.outer.begin(), s.outer.end(), s.scaled.outerIndexPtr()) &&
                              std::equal(s.inner.begin(), s.inner.end(), s.scaled.innerIndexPtr());
    if (!same_pattern) {
        s.lu.analyzePattern(s.scaled);
        s.n = n;
        s.nnz = s.scaled.nonZeros();
        s.outer.assign(s.scaled.outerIndexPtr(), s.scaled.outerIndexPtr() + n + 1);
        s.inner.assign(s.scaled.innerIndexPtr(), s.scaled.innerIndexPtr() + s.nnz);
    }
    s.lu.factorize(s.scaled);
    if (s.lu.info() != Eigen::Success) throw NoConvergence("sparse factorization failed");
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b) const {
    const auto& s = *impl_;
    Eigen::VectorXd rhs = s.row.cwiseProduct(b);
    Eigen::VectorXd y = s.lu.solve(rhs);
    Eigen::VectorXd x = s.col.cwiseProduct(y);
    // One step of iterative refinement guards against poor scaling.
    rhs = s.row.cwiseProduct(b - s.A * x);
    y = s.lu.solve(rhs);
    x += s.col.cwiseProduct(y);
    if (!x.allFinite()) throw NoConvergence("linear solve produced non-finite values");
    return x;
}

}  // namespace nozzle::detail
