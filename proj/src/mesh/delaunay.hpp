#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "nozzle/geometry.hpp"

namespace nozzle::detail {

// Geometric carrier of a boundary segment: a parametric curve with an id.
// Splitting a segment places the new vertex on the carrier, not on the chord.
struct Carrier {
    std::function<Point2(double)> eval;
    int tag = 0;  // opaque to the triangulator
};

struct SegmentInfo {
    int carrier = -1;
    double t0 = 0.0, t1 = 0.0;  // carrier parameters of the two endpoints (ordered as key lo, hi)
};

// Incremental Bowyer-Watson triangulation with protected boundary segments
// and Ruppert-style quality refinement.
class DelaunayRefiner {
public:
    struct Triangle {
        std::array<int, 3> v{};
        std::array<int, 3> n{-1, -1, -1};  // neighbour across the edge opposite v[i]
        bool alive = true;
        bool interior = false;
    };

    DelaunayRefiner(double xmin, double ymin, double xmax, double ymax);

    int insert_vertex(Point2 p);
    // Register an existing pair of vertices as a protected boundary segment.
    void add_segment(int a, int b, int carrier, double ta, double tb);
    int add_carrier(Carrier c);

    // Split segments until every one is a Delaunay edge not encroached upon.
    void recover_segments();
    // Flood-fill from the enclosing triangle to mark triangles inside the polygon.
    void classify_interior();

    using SizeFn = std::function<double(double, double)>;
    using InsideFn = std::function<bool(double, double)>;
    void refine(double min_angle_deg, const SizeFn& size, const InsideFn& inside, std::size_t max_vertices);

    const std::vector<Point2>& vertices() const { return verts_; }
    const std::vector<Triangle>& triangles() const { return tris_; }
    const std::unordered_map<std::uint64_t, SegmentInfo>& segments() const { return segs_; }
    const std::vector<Carrier>& carriers() const { return carriers_; }
    static std::uint64_t key(int a, int b);
    int super_vertex_count() const { return 3; }

private:
    int locate(Point2 p) const;
    int insert_in(Point2 p, int tri, bool lift_segment_a_b = false, int a = -1, int b = -1);
    int split_segment(std::uint64_t k);
    bool has_edge(int a, int b) const;
    bool encroached(std::uint64_t k) const;
    bool is_bad(int t, double ratio_bound, const SizeFn& size) const;
    void push_encroached_around(int vtx);

    std::vector<Point2> verts_;
    std::vector<Triangle> tris_;
    std::vector<int> vert_tri_;  // some alive triangle incident to each vertex
    std::unordered_map<std::uint64_t, SegmentInfo> segs_;
    std::vector<Carrier> carriers_;
    std::deque<std::uint64_t> seg_queue_;
    std::vector<int> last_new_;  // triangles created by the latest insertion
    mutable int hint_ = 0;
};

}  // namespace nozzle::detail
