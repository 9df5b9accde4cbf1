#include <doctest.h>

#include "nozzle/errors.hpp"
#include "nozzle/mesh.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace nozzle;

namespace {

// Every boundary vertex has exactly two boundary edges (closed loops) and
// every element edge is shared by two elements unless it is a boundary edge.
void check_topology(const Mesh& m) {
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& e : m.elements) {
        for (int k = 0; k < 3; ++k) {
            int a = e[static_cast<std::size_t>(k)], b = e[static_cast<std::size_t>((k + 1) % 3)];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }
    std::set<std::pair<int, int>> boundary;
    std::map<int, int> degree;
    for (const auto& be : m.boundary) {
        int a = be.nodes[0], b = be.nodes[1];
        if (a > b) std::swap(a, b);
        CHECK(boundary.insert({a, b}).second);
        ++degree[a];
        ++degree[b];
    }
    for (const auto& [edge, count] : edge_count) {
        if (boundary.count(edge)) CHECK(count == 1);
        else CHECK(count == 2);
    }
    for (const auto& [node, d] : degree) CHECK(d == 2);
    // Euler characteristic of a disc: V - E + F = 1.
    const long V = static_cast<long>(m.nodes.size());
    const long E = static_cast<long>(edge_count.size());
    const long F = static_cast<long>(m.elements.size());
    CHECK(V - E + F == 1);
}

}  // namespace

TEST_CASE("straight channel mesh is a closed, valid triangulation") {
    const auto p = build_straight_profile(4.0, 1.0);
    MeshOptions opt;
    opt.h = 0.25;
    const Mesh m = generate_mesh(p, 0.0, 4.0, opt);
    check_topology(m);
    double area = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        CHECK(m.element_area(e) > 0.0);
        area += m.element_area(e);
    }
    CHECK(area == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("nozzle mesh quality, tags and area") {
    const NozzleDims d;
    const auto p = build_angle_profile(d, 30.0);
    const Mesh m = generate_mesh(p, d, 0.1, 0.5);
    check_topology(m);
    double area = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e) {
        REQUIRE(m.element_area(e) > 0.0);
        CHECK(m.element_quality(e) >= 0.2);
        area += m.element_area(e);
    }
    CHECK(area == doctest::Approx(p.area()).epsilon(1e-3));

    const double x_heat = d.L_total - d.L_heat;
    std::map<BoundaryTag, int> count;
    for (const auto& be : m.boundary) {
        ++count[be.tag];
        const auto& a = m.nodes[static_cast<std::size_t>(be.nodes[0])];
        const auto& b = m.nodes[static_cast<std::size_t>(be.nodes[1])];
        switch (be.tag) {
            case BoundaryTag::Axis:
                CHECK(a.y == 0.0);
                CHECK(b.y == 0.0);
                break;
            case BoundaryTag::Inlet:
                CHECK(a.x == 0.0);
                CHECK(b.x == 0.0);
                break;
            case BoundaryTag::Outlet:
                CHECK(a.x == d.L_total);
                CHECK(b.x == d.L_total);
                break;
            case BoundaryTag::HeatedWall:
                CHECK(std::min(a.x, b.x) >= x_heat - 1e-9);
                break;
            case BoundaryTag::Wall:
                CHECK(std::max(a.x, b.x) <= x_heat + 1e-9);
                break;
        }
    }
    for (auto t : {BoundaryTag::Axis, BoundaryTag::Inlet, BoundaryTag::Outlet, BoundaryTag::Wall,
                   BoundaryTag::HeatedWall}) {
        CHECK(count[t] > 0);
    }
    // Nodes inside the domain.
    for (const auto& n : m.nodes) {
        CHECK(n.y >= -1e-9);
        CHECK(n.y <= p.radius(n.x) + 1e-9);
    }
}

TEST_CASE("graded mesh resolves the contraction") {
    const NozzleDims d;
    const double h = 0.1, grading = 0.5;
    const Mesh m = generate_mesh(build_angle_profile(d, 30.0), d, h, grading);
    const auto st = mesh_statistics(m);
    CHECK(st.h_min <= 1.2 * h * grading);
    CHECK(st.h_max >= h);
    CHECK(st.min_quality >= 0.2);
    CHECK(st.n_nodes == m.nodes.size());
}

TEST_CASE("all angles mesh, including the step and the spline") {
    const NozzleDims d;
    for (double a : {5.0, 30.0, 60.0, 90.0}) {
        const Mesh m = generate_mesh(build_angle_profile(d, a), d, 0.2, 0.25);
        CHECK(mesh_statistics(m).min_quality >= 0.2);
    }
    SplineParams sp;
    sp.alpha_scale_deg = 45.0;
    sp.y_ctrl = {1.6, 1.1, 0.7, 0.4, 0.3, 0.25};
    const auto p = build_spline_profile(d, sp);
    const Mesh m = generate_mesh(p, d, 0.2, 0.25);
    double area = 0.0;
    for (std::size_t e = 0; e < m.elements.size(); ++e) area += m.element_area(e);
    CHECK(area == doctest::Approx(p.area()).epsilon(1e-3));
}

TEST_CASE("meshing is deterministic and round-trips through text") {
    const NozzleDims d;
    const auto p = build_angle_profile(d, 50.0);
    const Mesh a = generate_mesh(p, d, 0.2, 0.5);
    const Mesh b = generate_mesh(p, d, 0.2, 0.5);
    std::ostringstream sa, sb;
    write_mesh(sa, a);
    write_mesh(sb, b);
    CHECK(sa.str() == sb.str());
    std::istringstream in(sa.str());
    const Mesh c = read_mesh(in);
    std::ostringstream sc;
    write_mesh(sc, c);
    CHECK(sc.str() == sa.str());
}

TEST_CASE("mesh reader rejects malformed input") {
    std::istringstream bad("nodes 1\n0 0\nelements 1\n0 1 2\n");
    CHECK_THROWS_AS(read_mesh(bad), ParseError);
    CHECK_THROWS_AS(boundary_tag_from_string("Roof"), ParseError);
}

TEST_CASE("statistics of tiny meshes") {
    Mesh one;
    one.nodes = {{0, 0}, {1, 0}, {0, 1}};
    one.elements = {{0, 1, 2}};
    auto st = mesh_statistics(one);
    CHECK(st.n_nodes == 3);
    CHECK(st.n_elements == 1);

    Mesh sq;
    sq.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    sq.elements = {{0, 1, 2}, {0, 2, 3}};
    CHECK(sq.element_quality(0) == doctest::Approx(sq.element_quality(1)));
    st = mesh_statistics(sq);
    CHECK(st.min_quality == doctest::Approx(sq.element_quality(0)));
    Mesh eq;
    eq.nodes = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
    eq.elements = {{0, 1, 2}};
    CHECK(eq.element_quality(0) == doctest::Approx(1.0));
}
