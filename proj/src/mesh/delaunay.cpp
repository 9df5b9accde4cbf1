#include "delaunay.hpp"

#include "nozzle/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nozzle::detail {

namespace {

double orient(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d lies strictly inside the circumcircle of the counter-clockwise triangle abc.
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Point2 circumcenter(const Point2& a, const Point2& b, const Point2& c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

double dist2(const Point2& a, const Point2& b) {
    return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

double point_segment_dist2(const Point2& p, const Point2& a, const Point2& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return dist2(p, {a.x + t * vx, a.y + t * vy});
}

}  // namespace

std::uint64_t DelaunayRefiner::key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

DelaunayRefiner::DelaunayRefiner(double xmin, double ymin, double xmax, double ymax) {
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double r = 20.0 * std::max({xmax - xmin, ymax - ymin, 1e-3});
    verts_.push_back({cx - 2.0 * r, cy - r});
    verts_.push_back({cx + 2.0 * r, cy - r});
    verts_.push_back({cx, cy + 2.0 * r});
    tris_.push_back(Triangle{{0, 1, 2}, {-1, -1, -1}, true, false});
    vert_tri_ = {0, 0, 0};
}

int DelaunayRefiner::add_carrier(Carrier c) {
    carriers_.push_back(std::move(c));
    return static_cast<int>(carriers_.size()) - 1;
}

void DelaunayRefiner::add_segment(int a, int b, int carrier, double ta, double tb) {
    SegmentInfo info;
    info.carrier = carrier;
    if (a < b) {
        info.t0 = ta;
        info.t1 = tb;
    } else {
        info.t0 = tb;
        info.t1 = ta;
    }
    const auto k = key(a, b);
    segs_[k] = info;
    seg_queue_.push_back(k);
}

int DelaunayRefiner::locate(Point2 p) const {
    int t = hint_;
    if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[static_cast<std::size_t>(t)].alive) {
        t = static_cast<int>(tris_.size()) - 1;
        while (t > 0 && !tris_[static_cast<std::size_t>(t)].alive) --t;
    }
    const std::size_t cap = 64 + 8 * tris_.size();
    for (std::size_t step = 0; step < cap; ++step) {
        const auto& tr = tris_[static_cast<std::size_t>(t)];
        int next = -1;
        // Rotate the first edge tested so that degenerate walks cannot cycle.
        for (int j = 0; j < 3; ++j) {
            const int i = static_cast<int>((static_cast<std::size_t>(j) + step) % 3);
            const auto& a = verts_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>((i + 1) % 3)])];
            const auto& b = verts_[static_cast<std::size_t>(tr.v[static_cast<std::size_t>((i + 2) % 3)])];
            if (orient(a, b, p) < 0.0) {
                next = tr.n[static_cast<std::size_t>(i)];
                break;
            }
        }
        if (next < 0) {
            hint_ = t;
            return t;
        }
        t = next;
    }
    // Fallback: exhaustive search.
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        const auto& tr = tris_[i];
        if (!tr.alive) continue;
        const auto& a = verts_[static_cast<std::size_t>(tr.v[0])];
        const auto& b = verts_[static_cast<std::size_t>(tr.v[1])];
        const auto& c = verts_[static_cast<std::size_t>(tr.v[2])];
        if (orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0) return static_cast<int>(i);
    }
    throw MeshFailure("point location failed");
}

int DelaunayRefiner::insert_vertex(Point2 p) { return insert_in(p, locate(p)); }

int DelaunayRefiner::insert_in(Point2 p, int start, bool, int, int) {
    const auto& st = tris_[static_cast<std::size_t>(start)];
    for (int i = 0; i < 3; ++i) {
        const int v = st.v[static_cast<std::size_t>(i)];
        if (dist2(verts_[static_cast<std::size_t>(v)], p) < 1e-24) return v;
    }

    std::vector<int> cavity{start};
    std::vector<char> in_cavity(tris_.size(), 0);
    in_cavity[static_cast<std::size_t>(start)] = 1;
    for (std::size_t q = 0; q < cavity.size(); ++q) {
        const auto& tr = tris_[static_cast<std::size_t>(cavity[q])];
        for (int i = 0; i < 3; ++i) {
            const int nb = tr.n[static_cast<std::size_t>(i)];
            if (nb < 0 || in_cavity[static_cast<std::size_t>(nb)]) continue;
            const int a = tr.v[static_cast<std::size_t>((i + 1) % 3)];
            const int b = tr.v[static_cast<std::size_t>((i + 2) % 3)];
            if (segs_.count(key(a, b))) continue;
            const auto& nt = tris_[static_cast<std::size_t>(nb)];
            if (incircle(verts_[static_cast<std::size_t>(nt.v[0])], verts_[static_cast<std::size_t>(nt.v[1])],
                         verts_[static_cast<std::size_t>(nt.v[2])], p) > 0.0) {
                in_cavity[static_cast<std::size_t>(nb)] = 1;
                cavity.push_back(nb);
            }
        }
    }

    const int pv = static_cast<int>(verts_.size());
    verts_.push_back(p);
    vert_tri_.push_back(-1);

    struct BoundaryEdgeRec {
        int a, b, outer, owner;
    };
    std::vector<BoundaryEdgeRec> ring;
    for (int t : cavity) {
        const auto& tr = tris_[static_cast<std::size_t>(t)];
        for (int i = 0; i < 3; ++i) {
            const int nb = tr.n[static_cast<std::size_t>(i)];
            if (nb >= 0 && in_cavity[static_cast<std::size_t>(nb)]) continue;
            ring.push_back({tr.v[static_cast<std::size_t>((i + 1) % 3)], tr.v[static_cast<std::size_t>((i + 2) % 3)], nb, t});
        }
    }

    last_new_.clear();
    std::unordered_map<int, int> by_start;
    by_start.reserve(ring.size() * 2);
    for (const auto& e : ring) {
        Triangle nt;
        nt.v = {e.a, e.b, pv};
        nt.n = {-1, -1, e.outer};
        nt.interior = tris_[static_cast<std::size_t>(e.owner)].interior;
        const int id = static_cast<int>(tris_.size());
        tris_.push_back(nt);
        last_new_.push_back(id);
        by_start[e.a] = id;
        if (e.outer >= 0) {
            auto& ot = tris_[static_cast<std::size_t>(e.outer)];
            for (int j = 0; j < 3; ++j) {
                if (ot.n[static_cast<std::size_t>(j)] == e.owner) {
                    const int oa = ot.v[static_cast<std::size_t>((j + 1) % 3)];
                    const int ob = ot.v[static_cast<std::size_t>((j + 2) % 3)];
                    if ((oa == e.b && ob == e.a)) ot.n[static_cast<std::size_t>(j)] = id;
                }
            }
        }
    }
    for (int id : last_new_) {
        auto& nt = tris_[static_cast<std::size_t>(id)];
        const auto it = by_start.find(nt.v[1]);
        if (it == by_start.end()) throw MeshFailure("cavity is not star-shaped");
        nt.n[0] = it->second;
        tris_[static_cast<std::size_t>(it->second)].n[1] = id;
    }
    for (int t : cavity) tris_[static_cast<std::size_t>(t)].alive = false;
    for (int id : last_new_) {
        const auto& nt = tris_[static_cast<std::size_t>(id)];
        for (int v : nt.v) vert_tri_[static_cast<std::size_t>(v)] = id;
    }
    hint_ = last_new_.empty() ? hint_ : last_new_.front();
    return pv;
}

bool DelaunayRefiner::has_edge(int a, int b) const {
    const int start = vert_tri_[static_cast<std::size_t>(a)];
    if (start < 0) return false;
    // Walk the fan around a in both directions.
    for (int dir = 0; dir < 2; ++dir) {
        int t = start;
        for (std::size_t guard = 0; guard < 4096 && t >= 0; ++guard) {
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            int i = 0;
            while (tr.v[static_cast<std::size_t>(i)] != a) ++i;
            if (tr.v[static_cast<std::size_t>((i + 1) % 3)] == b || tr.v[static_cast<std::size_t>((i + 2) % 3)] == b) return true;
            t = dir == 0 ? tr.n[static_cast<std::size_t>((i + 2) % 3)] : tr.n[static_cast<std::size_t>((i + 1) % 3)];
            if (t == start) break;
        }
    }
    return false;
}

bool DelaunayRefiner::encroached(std::uint64_t k) const {
    const int a = static_cast<int>(k >> 32);
    const int b = static_cast<int>(k & 0xffffffffu);
    const int start = vert_tri_[static_cast<std::size_t>(a)];
    if (start < 0) return true;
    bool found = false;
    const auto& pa = verts_[static_cast<std::size_t>(a)];
    const auto& pb = verts_[static_cast<std::size_t>(b)];
    for (int dir = 0; dir < 2; ++dir) {
        int t = start;
        for (std::size_t guard = 0; guard < 4096 && t >= 0; ++guard) {
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            int i = 0;
            while (tr.v[static_cast<std::size_t>(i)] != a) ++i;
            const int v1 = tr.v[static_cast<std::size_t>((i + 1) % 3)];
            const int v2 = tr.v[static_cast<std::size_t>((i + 2) % 3)];
            if (v1 == b || v2 == b) {
                found = true;
                const int c = v1 == b ? v2 : v1;
                if (c >= 3) {
                    const auto& pc = verts_[static_cast<std::size_t>(c)];
                    const double dot = (pa.x - pc.x) * (pb.x - pc.x) + (pa.y - pc.y) * (pb.y - pc.y);
                    if (dot < -1e-14 * dist2(pa, pb)) return true;
                }
            }
            t = dir == 0 ? tr.n[static_cast<std::size_t>((i + 2) % 3)] : tr.n[static_cast<std::size_t>((i + 1) % 3)];
            if (t == start) break;
        }
    }
    return !found;
}

void DelaunayRefiner::push_encroached_around(int vtx) {
    const int start = vert_tri_[static_cast<std::size_t>(vtx)];
    if (start < 0) return;
    for (int dir = 0; dir < 2; ++dir) {
        int t = start;
        for (std::size_t guard = 0; guard < 4096 && t >= 0; ++guard) {
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            for (int e = 0; e < 3; ++e) {
                const auto k = key(tr.v[static_cast<std::size_t>((e + 1) % 3)], tr.v[static_cast<std::size_t>((e + 2) % 3)]);
                if (segs_.count(k)) seg_queue_.push_back(k);
            }
            int i = 0;
            while (tr.v[static_cast<std::size_t>(i)] != vtx) ++i;
            t = dir == 0 ? tr.n[static_cast<std::size_t>((i + 2) % 3)] : tr.n[static_cast<std::size_t>((i + 1) % 3)];
            if (t == start) break;
        }
    }
}

int DelaunayRefiner::split_segment(std::uint64_t k) {
    const auto it = segs_.find(k);
    if (it == segs_.end()) return -1;
    const SegmentInfo info = it->second;
    const int lo = static_cast<int>(k >> 32);
    const int hi = static_cast<int>(k & 0xffffffffu);
    segs_.erase(it);
    const double tm = 0.5 * (info.t0 + info.t1);
    const Point2 p = carriers_[static_cast<std::size_t>(info.carrier)].eval(tm);
    const int m = insert_in(p, locate(p));
    if (m == lo || m == hi) throw MeshFailure("segment split produced a duplicate vertex");
    add_segment(lo, m, info.carrier, info.t0, tm);
    add_segment(m, hi, info.carrier, tm, info.t1);
    push_encroached_around(m);
    return m;
}

void DelaunayRefiner::recover_segments() {
    std::size_t guard = 0;
    while (!seg_queue_.empty()) {
        if (++guard > 10'000'000) throw MeshFailure("segment recovery did not terminate");
        const auto k = seg_queue_.front();
        seg_queue_.pop_front();
        if (!segs_.count(k)) continue;
        const int a = static_cast<int>(k >> 32);
        const int b = static_cast<int>(k & 0xffffffffu);
        if (!has_edge(a, b) || encroached(k)) split_segment(k);
    }
}

void DelaunayRefiner::classify_interior() {
    std::vector<int> stack;
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        auto& tr = tris_[i];
        tr.interior = tr.alive;
        if (tr.alive && (tr.v[0] < 3 || tr.v[1] < 3 || tr.v[2] < 3)) {
            tr.interior = false;
            stack.push_back(static_cast<int>(i));
        }
    }
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        const auto tr = tris_[static_cast<std::size_t>(t)];
        for (int i = 0; i < 3; ++i) {
            const int nb = tr.n[static_cast<std::size_t>(i)];
            if (nb < 0) continue;
            auto& nt = tris_[static_cast<std::size_t>(nb)];
            if (!nt.interior) continue;
            if (segs_.count(key(tr.v[static_cast<std::size_t>((i + 1) % 3)], tr.v[static_cast<std::size_t>((i + 2) % 3)]))) continue;
            nt.interior = false;
            stack.push_back(nb);
        }
    }
}

bool DelaunayRefiner::is_bad(int t, double ratio_bound, const SizeFn& size) const {
    const auto& tr = tris_[static_cast<std::size_t>(t)];
    const auto& a = verts_[static_cast<std::size_t>(tr.v[0])];
    const auto& b = verts_[static_cast<std::size_t>(tr.v[1])];
    const auto& c = verts_[static_cast<std::size_t>(tr.v[2])];
    const double lab = dist2(a, b), lbc = dist2(b, c), lca = dist2(c, a);
    const double lmin2 = std::min({lab, lbc, lca});
    const Point2 cc = circumcenter(a, b, c);
    const double r2 = dist2(cc, a);
    if (r2 > ratio_bound * ratio_bound * lmin2) return true;
    const double h = size((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
    return r2 > 0.65 * 0.65 * h * h;
}

void DelaunayRefiner::refine(double min_angle_deg, const SizeFn& size, const InsideFn& inside,
                             std::size_t max_vertices) {
    const double ratio_bound = 1.0 / (2.0 * std::sin(min_angle_deg * std::numbers::pi / 180.0));
    std::deque<int> queue;
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        if (tris_[i].alive && tris_[i].interior) queue.push_back(static_cast<int>(i));
    }
    const auto enqueue_new = [&] {
        for (int id : last_new_) queue.push_back(id);
    };
    const auto drain_segments = [&] {
        while (!seg_queue_.empty()) {
            const auto k = seg_queue_.front();
            seg_queue_.pop_front();
            if (!segs_.count(k)) continue;
            const int a = static_cast<int>(k >> 32);
            const int b = static_cast<int>(k & 0xffffffffu);
            if (!has_edge(a, b) || encroached(k)) {
                split_segment(k);
                enqueue_new();
            }
        }
    };

    std::vector<std::uint64_t> hit;
    while (!queue.empty()) {
        if (verts_.size() > max_vertices) throw MeshFailure("mesh refinement exceeded the node budget");
        const int t = queue.front();
        queue.pop_front();
        const auto& tr = tris_[static_cast<std::size_t>(t)];
        if (!tr.alive || !tr.interior) continue;
        if (!is_bad(t, ratio_bound, size)) continue;
        const Point2 c = circumcenter(verts_[static_cast<std::size_t>(tr.v[0])], verts_[static_cast<std::size_t>(tr.v[1])],
                                      verts_[static_cast<std::size_t>(tr.v[2])]);

        hit.clear();
        for (const auto& [k, info] : segs_) {
            const auto& pa = verts_[k >> 32];
            const auto& pb = verts_[k & 0xffffffffu];
            if ((pa.x - c.x) * (pb.x - c.x) + (pa.y - c.y) * (pb.y - c.y) < 0.0) hit.push_back(k);
        }
        if (hit.empty() && !inside(c.x, c.y)) {
            // Circumcentre between a chord and the curved wall it approximates:
            // refine the nearest segment so the chord moves onto the curve.
            double best = 1e300;
            std::uint64_t bk = 0;
            for (const auto& [k, info] : segs_) {
                const double d = point_segment_dist2(c, verts_[k >> 32], verts_[k & 0xffffffffu]);
                if (d < best || (d == best && k < bk)) {
                    best = d;
                    bk = k;
                }
            }
            hit.push_back(bk);
        }
        if (!hit.empty()) {
            std::sort(hit.begin(), hit.end());
            for (auto k : hit) {
                if (segs_.count(k)) {
                    split_segment(k);
                    enqueue_new();
                }
            }
            drain_segments();
            queue.push_back(t);
            continue;
        }
        const int loc = locate(c);
        if (!tris_[static_cast<std::size_t>(loc)].interior) continue;
        const int v = insert_in(c, loc);
        enqueue_new();
        push_encroached_around(v);
        drain_segments();
    }
}

}  // namespace nozzle::detail
