#include "delaunay.hpp"

#include "nozzle/errors.hpp"
#include "nozzle/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nozzle {

namespace {

using detail::Carrier;
using detail::DelaunayRefiner;

constexpr int kTagAxis = 0;
constexpr int kTagOutlet = 1;
constexpr int kTagWall = 2;
constexpr int kTagInlet = 3;

struct SizeField {
    double h = 0.1;
    double h_fine = 0.1;
    double x_fine = 0.0;
    double growth = 0.25;

    double operator()(double x, double) const {
        if (x >= x_fine) return h_fine;
        return std::min(h, h_fine + growth * (x_fine - x));
    }
};

// Parameter in [t0, t1] where carrier.x == x, assuming x is monotone along it.
double parameter_at_x(const Carrier& c, double t0, double t1, double x) {
    double lo = t0, hi = t1;
    const bool increasing = c.eval(t1).x >= c.eval(t0).x;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool below = c.eval(mid).x < x;
        if (below == increasing) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Parameters in [t0, t1] spaced by roughly the local target size, endpoints included.
std::vector<double> discretize(const Carrier& c, double t0, double t1, const SizeField& size) {
    constexpr int kDense = 2048;
    std::vector<double> ts(kDense + 1), cum(kDense + 1, 0.0);
    Point2 prev = c.eval(t0);
    ts[0] = t0;
    for (int k = 1; k <= kDense; ++k) {
        const double t = t0 + (t1 - t0) * k / kDense;
        const Point2 q = c.eval(t);
        ts[static_cast<std::size_t>(k)] = t;
        cum[static_cast<std::size_t>(k)] = cum[static_cast<std::size_t>(k - 1)] + std::hypot(q.x - prev.x, q.y - prev.y);
        prev = q;
    }
    const double total = cum.back();
    // Integrate ds / h to get the node count, then place nodes at equal steps of that measure.
    std::vector<double> w(kDense + 1, 0.0);
    for (int k = 1; k <= kDense; ++k) {
        const double tm = 0.5 * (ts[static_cast<std::size_t>(k - 1)] + ts[static_cast<std::size_t>(k)]);
        const Point2 pm = c.eval(tm);
        const double ds = cum[static_cast<std::size_t>(k)] - cum[static_cast<std::size_t>(k - 1)];
        w[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k - 1)] + ds / (0.9 * size(pm.x, pm.y));
    }
    const int n = std::max(1, static_cast<int>(std::ceil(w.back() - 1e-9)));
    std::vector<double> out{t0};
    if (total <= 0.0) return {t0, t1};
    std::size_t k = 1;
    for (int i = 1; i < n; ++i) {
        const double target = w.back() * i / n;
        while (k < w.size() - 1 && w[k] < target) ++k;
        const double f = (target - w[k - 1]) / (w[k] - w[k - 1]);
        out.push_back(ts[k - 1] + f * (ts[k] - ts[k - 1]));
    }
    out.push_back(t1);
    return out;
}

Carrier line_carrier(Point2 a, Point2 b, int tag) {
    return Carrier{[a, b](double t) { return Point2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }, tag};
}

}  // namespace

Mesh generate_mesh(const BoundaryProfile& profile, double x_heat_begin, double x_heat_end, const MeshOptions& options) {
    if (!(options.h > 0.0)) throw MeshFailure("mesh size must be positive");
    if (!(options.grading > 0.0) || options.grading > 1.0) throw MeshFailure("grading must lie in (0, 1]");
    if (!(options.min_angle_deg > 0.0) || options.min_angle_deg > 33.0) throw MeshFailure("minimum angle must lie in (0, 33] degrees");

    const double L = profile.length();
    const auto& segs = profile.segments();
    const Point2 inlet_top = profile.point_on(0, 0.0);
    const Point2 outlet_top = profile.point_on(segs.size() - 1, 1.0);
    const double r_max = inlet_top.y;

    SizeField size;
    size.h = options.h;
    size.h_fine = options.h * options.grading;
    size.x_fine = profile.markers().contraction_start - r_max;
    size.growth = options.growth;

    DelaunayRefiner dt(0.0, 0.0, L, r_max);

    // Vertex cache keyed by exact coordinates so shared corners are inserted once.
    std::map<std::pair<double, double>, int> corner;
    const auto vertex_at = [&](Point2 p) {
        const auto k = std::make_pair(p.x, p.y);
        const auto it = corner.find(k);
        if (it != corner.end()) return it->second;
        const int v = dt.insert_vertex(p);
        corner.emplace(k, v);
        return v;
    };

    const auto add_chain = [&](int carrier_id, std::vector<double> breaks) {
        const Carrier& c = dt.carriers()[static_cast<std::size_t>(carrier_id)];
        std::sort(breaks.begin(), breaks.end());
        for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
            const auto ts = discretize(c, breaks[b], breaks[b + 1], size);
            int prev = vertex_at(c.eval(ts.front()));
            for (std::size_t i = 1; i < ts.size(); ++i) {
                const int v = vertex_at(c.eval(ts[i]));
                dt.add_segment(prev, v, carrier_id, ts[i - 1], ts[i]);
                prev = v;
            }
        }
    };

    add_chain(dt.add_carrier(line_carrier({0.0, 0.0}, {L, 0.0}, kTagAxis)), {0.0, 1.0});
    add_chain(dt.add_carrier(line_carrier({L, 0.0}, outlet_top, kTagOutlet)), {0.0, 1.0});
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const int id = dt.add_carrier(Carrier{[&profile, s](double t) { return profile.point_on(s, t); }, kTagWall});
        std::vector<double> breaks{0.0, 1.0};
        const Point2 a = profile.point_on(s, 0.0), b = profile.point_on(s, 1.0);
        for (double xf : {x_heat_begin, x_heat_end}) {
            if (b.x - a.x > 1e-12 && xf > a.x + 1e-9 && xf < b.x - 1e-9) {
                breaks.push_back(parameter_at_x(dt.carriers()[static_cast<std::size_t>(id)], 0.0, 1.0, xf));
            }
        }
        add_chain(id, breaks);
    }
    add_chain(dt.add_carrier(line_carrier(inlet_top, {0.0, 0.0}, kTagInlet)), {0.0, 1.0});

    dt.recover_segments();
    dt.classify_interior();
    const auto inside = [&](double x, double y) {
        return x >= -1e-12 && x <= L + 1e-12 && y >= -1e-12 && y <= profile.radius(x) + 1e-9;
    };
    dt.refine(options.min_angle_deg, std::cref(size), inside, options.max_nodes + 3);

    // Collect interior triangles and renumber vertices in (x, y) order.
    const auto& verts = dt.vertices();
    std::vector<char> used(verts.size(), 0);
    for (const auto& t : dt.triangles()) {
        if (!t.alive || !t.interior) continue;
        for (int v : t.v) used[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<int> order;
    for (std::size_t i = 3; i < verts.size(); ++i) {
        if (used[i]) order.push_back(static_cast<int>(i));
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& pa = verts[static_cast<std::size_t>(a)];
        const auto& pb = verts[static_cast<std::size_t>(b)];
        return pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y);
    });
    if (order.size() > options.max_nodes) throw MeshFailure("mesh exceeds the node budget");
    std::vector<int> renum(verts.size(), -1);
    Mesh mesh;
    mesh.resolution = options.h;
    mesh.nodes.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        renum[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
        mesh.nodes.push_back(verts[static_cast<std::size_t>(order[i])]);
    }
    for (const auto& t : dt.triangles()) {
        if (!t.alive || !t.interior) continue;
        std::array<int, 3> e{renum[static_cast<std::size_t>(t.v[0])], renum[static_cast<std::size_t>(t.v[1])],
                             renum[static_cast<std::size_t>(t.v[2])]};
        // Start each element at its smallest index, keeping orientation.
        const auto m = std::min_element(e.begin(), e.end()) - e.begin();
        std::rotate(e.begin(), e.begin() + m, e.end());
        mesh.elements.push_back(e);
    }
    std::sort(mesh.elements.begin(), mesh.elements.end());

    for (const auto& [k, info] : dt.segments()) {
        int a = renum[static_cast<std::size_t>(k >> 32)];
        int b = renum[static_cast<std::size_t>(k & 0xffffffffu)];
        if (a < 0 || b < 0) throw MeshFailure("boundary segment lost during refinement");
        if (a > b) std::swap(a, b);
        BoundaryTag tag = BoundaryTag::Wall;
        switch (dt.carriers()[static_cast<std::size_t>(info.carrier)].tag) {
            case kTagAxis: tag = BoundaryTag::Axis; break;
            case kTagOutlet: tag = BoundaryTag::Outlet; break;
            case kTagInlet: tag = BoundaryTag::Inlet; break;
            default: {
                const auto& pa = mesh.nodes[static_cast<std::size_t>(a)];
                const auto& pb = mesh.nodes[static_cast<std::size_t>(b)];
                const bool heated = std::min(pa.x, pb.x) >= x_heat_begin - 1e-9 && std::max(pa.x, pb.x) <= x_heat_end + 1e-9;
                tag = heated ? BoundaryTag::HeatedWall : BoundaryTag::Wall;
            }
        }
        mesh.boundary.push_back({{a, b}, tag});
    }
    std::sort(mesh.boundary.begin(), mesh.boundary.end(), [](const BoundaryEdge& p, const BoundaryEdge& q) {
        return p.nodes < q.nodes;
    });

    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        if (!(mesh.element_area(e) > 0.0)) throw MeshFailure("mesh contains an inverted element");
        if (mesh.element_quality(e) < 0.2) throw MeshFailure("mesh contains a degenerate element");
    }
    return mesh;
}

Mesh generate_mesh(const BoundaryProfile& profile, const NozzleDims& dims, const MeshOptions& options) {
    const double x_end = dims.L_total - options.heated_offset;
    return generate_mesh(profile, x_end - dims.L_heat, x_end, options);
}

Mesh generate_mesh(const BoundaryProfile& profile, const NozzleDims& dims, double h, double grading) {
    MeshOptions o;
    o.h = h;
    o.grading = grading;
    return generate_mesh(profile, dims, o);
}

}  // namespace nozzle
