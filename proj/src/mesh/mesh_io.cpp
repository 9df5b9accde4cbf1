#include "nozzle/mesh.hpp"

#include "nozzle/errors.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace nozzle {

namespace {

void expect_header(std::istream& is, const char* word, std::size_t& count) {
    std::string w;
    if (!(is >> w >> count) || w != word) throw ParseError(std::string("mesh file: expected '") + word + "' header");
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
    char buf[96];
    os << "nodes " << mesh.nodes.size() << '\n';
    for (const auto& p : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        os << buf;
    }
    os << "elements " << mesh.elements.size() << '\n';
    for (const auto& e : mesh.elements) os << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
    os << "edges " << mesh.boundary.size() << '\n';
    for (const auto& b : mesh.boundary) os << b.nodes[0] << ' ' << b.nodes[1] << ' ' << to_string(b.tag) << '\n';
}

void write_mesh(const std::string& path, const Mesh& mesh) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_mesh(os, mesh);
}

Mesh read_mesh(std::istream& is) {
    Mesh m;
    std::size_t n = 0;
    expect_header(is, "nodes", n);
    m.nodes.resize(n);
    for (auto& p : m.nodes) {
        if (!(is >> p.x >> p.y)) throw ParseError("mesh file: truncated node list");
    }
    expect_header(is, "elements", n);
    m.elements.resize(n);
    for (auto& e : m.elements) {
        if (!(is >> e[0] >> e[1] >> e[2])) throw ParseError("mesh file: truncated element list");
        for (int v : e) {
            if (v < 0 || static_cast<std::size_t>(v) >= m.nodes.size()) throw ParseError("mesh file: node index out of range");
        }
    }
    expect_header(is, "edges", n);
    m.boundary.resize(n);
    for (auto& b : m.boundary) {
        std::string tag;
        if (!(is >> b.nodes[0] >> b.nodes[1] >> tag)) throw ParseError("mesh file: truncated edge list");
        b.tag = boundary_tag_from_string(tag);
    }
    return m;
}

Mesh read_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    return read_mesh(is);
}

void write_mesh_vtk(const std::string& path, const Mesh& mesh) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "# vtk DataFile Version 3.0\nnozzle mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.nodes.size() << " double\n";
    char buf[96];
    for (const auto& p : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%.10g %.10g 0\n", p.x, p.y);
        os << buf;
    }
    os << "CELLS " << mesh.elements.size() << ' ' << 4 * mesh.elements.size() << '\n';
    for (const auto& e : mesh.elements) os << "3 " << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
    os << "CELL_TYPES " << mesh.elements.size() << '\n';
    for (std::size_t i = 0; i < mesh.elements.size(); ++i) os << "5\n";
}

}  // namespace nozzle
