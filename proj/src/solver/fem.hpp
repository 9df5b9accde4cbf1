#pragma once

#include <array>
#include <vector>

#include <Eigen/Sparse>

#include "nozzle/mesh.hpp"
#include "nozzle/solver.hpp"

namespace nozzle::detail {

// Millimetres to metres.
inline constexpr double kMm = 1e-3;

// Linear triangle in SI units: N_a = (a0 + b_a x + c_a y), constant gradients.
struct Element {
    std::array<int, 3> n{};
    std::array<double, 3> x{}, y{};  // [m]
    std::array<double, 3> b{}, c{};  // dN/dx, dN/dy [1/m]
    double area = 0.0;               // [m^2]
    double h = 0.0;                  // size for stabilization [m]
};

Element make_element(const Mesh& mesh, std::size_t e);

// Three-point interior rule, exact for quadratics.
struct QuadPoint {
    std::array<double, 3> N;
    double w;  // fraction of element area
};
const std::array<QuadPoint, 3>& triangle_rule();

// Gauss rule on [0,1] for edge integrals.
struct EdgePoint {
    double t, w;
};
const std::array<EdgePoint, 3>& edge_rule();

// Nodes with a Dirichlet value per component.
struct Constraints {
    std::vector<char> fixed;    // per global dof
    std::vector<double> value;  // per global dof
    explicit Constraints(std::size_t n_dofs) : fixed(n_dofs, 0), value(n_dofs, 0.0) {}
    void set(std::size_t dof, double v) {
        fixed[dof] = 1;
        value[dof] = v;
    }
};

// Velocity and temperature constraints for the given boundary conditions.
// Components are addressed as dof = stride * node + offset.
struct FlowDofLayout {
    int stride = 3;
    int u = 0, v = 1;
};
void apply_velocity_bc(const Mesh& mesh, const BoundaryConditions& bc, GeometryMode mode, const FlowDofLayout& layout,
                       Constraints& cons);

// Triplet assembly helper that replaces constrained rows by the identity.
class SystemBuilder {
public:
    explicit SystemBuilder(std::size_t n) : n_(n), rhs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}
    void add(int i, int j, double v) {
        if (v != 0.0) trips_.emplace_back(i, j, v);
    }
    void add_rhs(int i, double v) { rhs_[i] += v; }
    // Build A and b with Dirichlet rows replaced: row i -> e_i, b_i -> value.
    void finish(const Constraints& cons, Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b);
    Eigen::VectorXd& rhs() { return rhs_; }
    void reserve(std::size_t n) { trips_.reserve(n); }

private:
    std::size_t n_;
    std::vector<Eigen::Triplet<double>> trips_;
    Eigen::VectorXd rhs_;
};

// Residual norm over free dofs, per block of the given component set.
double free_norm(const Eigen::VectorXd& r, const Constraints& cons, int stride, std::initializer_list<int> comps);

// Edges adjacent to each node for boundary lookups.
std::vector<std::vector<BoundaryTag>> node_tags(const Mesh& mesh);

}  // namespace nozzle::detail
