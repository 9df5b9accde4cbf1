#include "nozzle/errors.hpp"
#include "nozzle/geometry.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace nozzle {

void write_profile_polyline(std::ostream& os, const BoundaryProfile& profile, double spacing) {
    os << "# x_mm r_mm\n";
    char buf[64];
    for (const auto& p : profile.polyline(spacing)) {
        std::snprintf(buf, sizeof buf, "%.6f %.6f\n", p.x, p.y);
        os << buf;
    }
}

void write_profile_polyline(const std::string& path, const BoundaryProfile& profile, double spacing) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path + " for writing");
    write_profile_polyline(f, profile, spacing);
}

}  // namespace nozzle
