#include "fem.hpp"

#include <algorithm>
#include <cmath>

namespace nozzle::detail {

Element make_element(const Mesh& mesh, std::size_t e) {
    Element el;
    el.n = mesh.elements[e];
    for (int i = 0; i < 3; ++i) {
        const auto& p = mesh.nodes[static_cast<std::size_t>(el.n[static_cast<std::size_t>(i)])];
        el.x[static_cast<std::size_t>(i)] = p.x * kMm;
        el.y[static_cast<std::size_t>(i)] = p.y * kMm;
    }
    const double det = (el.x[1] - el.x[0]) * (el.y[2] - el.y[0]) - (el.x[2] - el.x[0]) * (el.y[1] - el.y[0]);
    el.area = 0.5 * det;
    for (int i = 0; i < 3; ++i) {
        const auto j = static_cast<std::size_t>((i + 1) % 3), k = static_cast<std::size_t>((i + 2) % 3);
        el.b[static_cast<std::size_t>(i)] = (el.y[j] - el.y[k]) / det;
        el.c[static_cast<std::size_t>(i)] = (el.x[k] - el.x[j]) / det;
    }
    el.h = std::sqrt(2.0 * el.area);
    return el;
}

const std::array<QuadPoint, 3>& triangle_rule() {
    static const std::array<QuadPoint, 3> r{{{{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
                                             {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
                                             {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0}}};
    return r;
}

const std::array<EdgePoint, 3>& edge_rule() {
    static const std::array<EdgePoint, 3> r{{{0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0},
                                             {0.5, 8.0 / 18.0},
                                             {0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18.0}}};
    return r;
}

std::vector<std::vector<BoundaryTag>> node_tags(const Mesh& mesh) {
    std::vector<std::vector<BoundaryTag>> tags(mesh.nodes.size());
    for (const auto& e : mesh.boundary) {
        for (int n : e.nodes) {
            auto& t = tags[static_cast<std::size_t>(n)];
            if (std::find(t.begin(), t.end(), e.tag) == t.end()) t.push_back(e.tag);
        }
    }
    return tags;
}

void apply_velocity_bc(const Mesh& mesh, const BoundaryConditions& bc, GeometryMode, const FlowDofLayout& layout,
                       Constraints& cons) {
    const auto tags = node_tags(mesh);
    const auto has = [](const std::vector<BoundaryTag>& t, BoundaryTag x) {
        return std::find(t.begin(), t.end(), x) != t.end();
    };
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const auto& t = tags[i];
        if (t.empty()) continue;
        const auto du = static_cast<std::size_t>(layout.stride) * i + static_cast<std::size_t>(layout.u);
        const auto dv = static_cast<std::size_t>(layout.stride) * i + static_cast<std::size_t>(layout.v);
        const bool wall = has(t, BoundaryTag::Wall) || has(t, BoundaryTag::HeatedWall);
        const bool axis = has(t, BoundaryTag::Axis);
        // Precedence: fixed axis wall, moving wall, inlet, axis symmetry, outlet.
        if (axis && bc.axis_no_slip) {
            cons.set(du, 0.0);
            cons.set(dv, 0.0);
        } else if (wall) {
            cons.set(du, bc.wall_velocity * kMm);
            cons.set(dv, 0.0);
        } else if (has(t, BoundaryTag::Inlet)) {
            const double y = mesh.nodes[i].y;
            cons.set(du, (bc.inlet_profile ? bc.inlet_profile(y) : bc.u_in) * kMm);
            cons.set(dv, 0.0);
        } else {
            if (axis) cons.set(dv, 0.0);
            if (has(t, BoundaryTag::Outlet)) cons.set(dv, 0.0);
        }
    }
}

void SystemBuilder::finish(const Constraints& cons, Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b) {
    std::vector<Eigen::Triplet<double>> kept;
    kept.reserve(trips_.size() + n_);
    for (const auto& t : trips_) {
        if (!cons.fixed[static_cast<std::size_t>(t.row())]) kept.push_back(t);
    }
    b = rhs_;
    for (std::size_t i = 0; i < n_; ++i) {
        if (cons.fixed[i]) {
            kept.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
            b[static_cast<Eigen::Index>(i)] = cons.value[i];
        }
    }
    A.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    A.setFromTriplets(kept.begin(), kept.end());
    A.makeCompressed();
}

double free_norm(const Eigen::VectorXd& r, const Constraints& cons, int stride, std::initializer_list<int> comps) {
    double s = 0.0;
    const auto n = static_cast<std::size_t>(r.size()) / static_cast<std::size_t>(stride);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c : comps) {
            const auto d = static_cast<std::size_t>(stride) * i + static_cast<std::size_t>(c);
            if (!cons.fixed[d]) s += r[static_cast<Eigen::Index>(d)] * r[static_cast<Eigen::Index>(d)];
        }
    }
    return std::sqrt(s);
}

}  // namespace nozzle::detail
