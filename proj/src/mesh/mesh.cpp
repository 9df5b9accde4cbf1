#include "nozzle/mesh.hpp"

#include "nozzle/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nozzle {

const char* to_string(BoundaryTag tag) {
    switch (tag) {
        case BoundaryTag::Inlet: return "Inlet";
        case BoundaryTag::Outlet: return "Outlet";
        case BoundaryTag::Wall: return "Wall";
        case BoundaryTag::HeatedWall: return "HeatedWall";
        case BoundaryTag::Axis: return "Axis";
    }
    return "?";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
    for (auto t : {BoundaryTag::Inlet, BoundaryTag::Outlet, BoundaryTag::Wall, BoundaryTag::HeatedWall, BoundaryTag::Axis}) {
        if (s == to_string(t)) return t;
    }
    throw ParseError("unknown boundary tag '" + s + "'");
}

double Mesh::element_area(std::size_t e) const {
    const auto& el = elements.at(e);
    const auto& a = nodes[static_cast<std::size_t>(el[0])];
    const auto& b = nodes[static_cast<std::size_t>(el[1])];
    const auto& c = nodes[static_cast<std::size_t>(el[2])];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double Mesh::element_quality(std::size_t e) const {
    const auto& el = elements.at(e);
    const auto& a = nodes[static_cast<std::size_t>(el[0])];
    const auto& b = nodes[static_cast<std::size_t>(el[1])];
    const auto& c = nodes[static_cast<std::size_t>(el[2])];
    const double la = std::hypot(b.x - c.x, b.y - c.y);
    const double lb = std::hypot(c.x - a.x, c.y - a.y);
    const double lc = std::hypot(a.x - b.x, a.y - b.y);
    const double area = std::abs(element_area(e));
    if (area <= 0.0) return 0.0;
    const double s = 0.5 * (la + lb + lc);
    const double r = area / s;
    const double R = la * lb * lc / (4.0 * area);
    return 2.0 * r / R;
}

double Mesh::longest_edge(std::size_t e) const {
    const auto& el = elements.at(e);
    double m = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto& p = nodes[static_cast<std::size_t>(el[static_cast<std::size_t>(i)])];
        const auto& q = nodes[static_cast<std::size_t>(el[static_cast<std::size_t>((i + 1) % 3)])];
        m = std::max(m, std::hypot(p.x - q.x, p.y - q.y));
    }
    return m;
}

MeshStatistics mesh_statistics(const Mesh& mesh) {
    MeshStatistics s;
    s.n_nodes = mesh.nodes.size();
    s.n_elements = mesh.elements.size();
    if (mesh.elements.empty()) return s;
    s.min_quality = std::numeric_limits<double>::infinity();
    s.h_min = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        s.min_quality = std::min(s.min_quality, mesh.element_quality(e));
        const double l = mesh.longest_edge(e);
        s.h_min = std::min(s.h_min, l);
        s.h_max = std::max(s.h_max, l);
    }
    return s;
}

}  // namespace nozzle
