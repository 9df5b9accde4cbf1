#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nozzle/geometry.hpp"

namespace nozzle {

enum class BoundaryTag : std::uint8_t { Inlet, Outlet, Wall, HeatedWall, Axis };

const char* to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

struct BoundaryEdge {
    std::array<int, 2> nodes{};
    BoundaryTag tag = BoundaryTag::Wall;
};

// Triangulation of the half-domain {0 <= x <= L, 0 <= y <= r(x)} in millimetres.
// Elements are counter-clockwise.
struct Mesh {
    std::vector<Point2> nodes;
    std::vector<std::array<int, 3>> elements;
    std::vector<BoundaryEdge> boundary;
    double resolution = 0.0;  // characteristic size h requested at generation

    double element_area(std::size_t e) const;
    // Scaled inradius/circumradius ratio 2 r / R, 1 for an equilateral triangle.
    double element_quality(std::size_t e) const;
    double longest_edge(std::size_t e) const;
};

struct MeshOptions {
    double h = 0.1;        // size away from the contraction [mm]
    double grading = 1.0;  // size factor near the contraction and outlet land, (0, 1]
    double growth = 0.25;  // size gradient outside the refined zone
    // Heated wall is [L - offset - L_heat, L - offset].
    double heated_offset = 0.0;
    double min_angle_deg = 25.0;
    std::size_t max_nodes = 400000;
};

// Triangulate the profile's half-domain. x_heat_begin/x_heat_end bound the
// heated portion of the wall.
Mesh generate_mesh(const BoundaryProfile& profile, double x_heat_begin, double x_heat_end,
                   const MeshOptions& options);
Mesh generate_mesh(const BoundaryProfile& profile, const NozzleDims& dims, double h, double grading);
Mesh generate_mesh(const BoundaryProfile& profile, const NozzleDims& dims, const MeshOptions& options);

struct MeshStatistics {
    std::size_t n_nodes = 0;
    std::size_t n_elements = 0;
    double min_quality = 0.0;
    double h_min = 0.0;  // smallest longest-edge over elements
    double h_max = 0.0;  // largest longest-edge over elements
};

MeshStatistics mesh_statistics(const Mesh& mesh);

// Plain-text format: "nodes N" + N lines "x y", "elements M" + M lines "a b c",
// "edges K" + K lines "a b Tag".
void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
Mesh read_mesh(const std::string& path);
// Legacy VTK unstructured grid (ASCII), geometry only.
void write_mesh_vtk(const std::string& path, const Mesh& mesh);

}  // namespace nozzle
