#include "nozzle/errors.hpp"
#include "nozzle/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace nozzle {

double MassBalance::relative_imbalance() const {
    if (q_in == 0.0) return q_out == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(q_in - q_out) / std::abs(q_in);
}

MassBalance mass_balance(const FlowSolution& sol, const Mesh& mesh) {
    MassBalance mb;
    const bool axi = sol.geometry == GeometryMode::Axisymmetric;
    for (const auto& e : mesh.boundary) {
        if (e.tag != BoundaryTag::Inlet && e.tag != BoundaryTag::Outlet) continue;
        const auto i = static_cast<std::size_t>(e.nodes[0]), j = static_cast<std::size_t>(e.nodes[1]);
        const auto& a = mesh.nodes[i];
        const auto& b = mesh.nodes[j];
        const double len = std::abs(b.y - a.y);
        // Both faces are vertical, so the normal flux is the axial velocity.
        // Simpson is exact for the product of two linears.
        const double ua = sol.u[i], ub = sol.u[j];
        double q;
        if (axi) {
            const double um = 0.5 * (ua + ub), ym = 0.5 * (a.y + b.y);
            q = 2.0 * M_PI * len / 6.0 * (ua * a.y + 4.0 * um * ym + ub * b.y);
        } else {
            q = len * 0.5 * (ua + ub);
        }
        (e.tag == BoundaryTag::Inlet ? mb.q_in : mb.q_out) += q;
    }
    return mb;
}

Recirculation detect_recirculation(const FlowSolution& sol, const Mesh& mesh, double threshold) {
    Recirculation out;
    const std::size_t ne = mesh.elements.size();
    const double cut = -threshold * std::abs(sol.u_ref);
    std::vector<char> back(ne, 0);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& el = mesh.elements[e];
        const double uc = (sol.u[static_cast<std::size_t>(el[0])] + sol.u[static_cast<std::size_t>(el[1])] +
                           sol.u[static_cast<std::size_t>(el[2])]) / 3.0;
        back[e] = uc < cut;
    }
    std::vector<char> wall_node(mesh.nodes.size(), 0);
    for (const auto& b : mesh.boundary) {
        if (b.tag == BoundaryTag::Wall || b.tag == BoundaryTag::HeatedWall) {
            wall_node[static_cast<std::size_t>(b.nodes[0])] = 1;
            wall_node[static_cast<std::size_t>(b.nodes[1])] = 1;
        }
    }
    // Element adjacency through shared edges.
    std::map<std::pair<int, int>, std::vector<std::size_t>> edge_elems;
    for (std::size_t e = 0; e < ne; ++e) {
        if (!back[e]) continue;
        const auto& el = mesh.elements[e];
        for (int k = 0; k < 3; ++k) {
            int a = el[static_cast<std::size_t>(k)], b = el[static_cast<std::size_t>((k + 1) % 3)];
            if (a > b) std::swap(a, b);
            edge_elems[{a, b}].push_back(e);
        }
    }
    std::vector<int> comp(ne, -1);
    for (std::size_t seed = 0; seed < ne; ++seed) {
        if (!back[seed] || comp[seed] >= 0) continue;
        const int id = static_cast<int>(seed);
        std::vector<std::size_t> stack{seed}, members;
        comp[seed] = id;
        while (!stack.empty()) {
            const auto e = stack.back();
            stack.pop_back();
            members.push_back(e);
            const auto& el = mesh.elements[e];
            for (int k = 0; k < 3; ++k) {
                int a = el[static_cast<std::size_t>(k)], b = el[static_cast<std::size_t>((k + 1) % 3)];
                if (a > b) std::swap(a, b);
                for (auto nb : edge_elems[{a, b}]) {
                    if (comp[nb] < 0) {
                        comp[nb] = id;
                        stack.push_back(nb);
                    }
                }
            }
        }
        bool touches_wall = false;
        double area = 0.0, cx = 0.0, cy = 0.0;
        for (auto e : members) {
            const auto& el = mesh.elements[e];
            for (int n : el) touches_wall = touches_wall || wall_node[static_cast<std::size_t>(n)];
            const double A = mesh.element_area(e);
            area += A;
            for (int n : el) {
                cx += A * mesh.nodes[static_cast<std::size_t>(n)].x / 3.0;
                cy += A * mesh.nodes[static_cast<std::size_t>(n)].y / 3.0;
            }
        }
        if (!touches_wall || area <= 0.0) continue;
        out.has_vortex = true;
        out.vortex_area += area;
        out.centers.push_back({cx / area, cy / area});
    }
    return out;
}

OutletTemperature outlet_temperature_profile(const FlowSolution& sol, const Mesh& mesh, std::size_t n_samples) {
    OutletTemperature out;
    if (sol.T.empty()) throw Error("solution carries no temperature field");
    std::vector<std::pair<double, double>> pts;  // (y, T) of outlet nodes
    for (const auto& e : mesh.boundary) {
        if (e.tag != BoundaryTag::Outlet) continue;
        for (int n : e.nodes) pts.emplace_back(mesh.nodes[static_cast<std::size_t>(n)].y, sol.T[static_cast<std::size_t>(n)]);
    }
    if (pts.empty()) throw Error("mesh has no outlet edges");
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const double y0 = pts.front().first, y1 = pts.back().first;
    out.T_min = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) out.T_min = std::min(out.T_min, p.second);
    const std::size_t n = std::max<std::size_t>(n_samples, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = n == 1 ? y0 : y0 + (y1 - y0) * static_cast<double>(i) / static_cast<double>(n - 1);
        auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(y, -std::numeric_limits<double>::infinity()));
        double T;
        if (it == pts.begin()) T = it->second;
        else if (it == pts.end()) T = pts.back().second;
        else {
            const auto& a = *(it - 1);
            const auto& b = *it;
            const double f = b.first > a.first ? (y - a.first) / (b.first - a.first) : 0.0;
            T = a.second + f * (b.second - a.second);
        }
        out.samples.emplace_back(y, T);
    }
    return out;
}

}  // namespace nozzle
