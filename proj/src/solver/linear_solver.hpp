#pragma once

#include <memory>

#include <Eigen/Sparse>

namespace nozzle::detail {

// Direct sparse LU with row/column equilibration. The symbolic analysis is
// kept while the sparsity pattern is unchanged.
class LinearSolver {
public:
    LinearSolver();
    ~LinearSolver();
    LinearSolver(const LinearSolver&) = delete;
    LinearSolver& operator=(const LinearSolver&) = delete;

    // Throws NoConvergence if the matrix is numerically singular.
    void factorize(const Eigen::SparseMatrix<double>& A);
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    static const char* backend();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace nozzle::detail
