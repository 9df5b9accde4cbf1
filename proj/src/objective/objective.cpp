#include "nozzle/objective.hpp"

#include "nozzle/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nozzle {

double section_average(const std::vector<double>& field, const Mesh& mesh, double xs, GeometryMode mode) {
    if (mesh.nodes.empty()) throw OutOfDomain("empty mesh");
    double xmin = mesh.nodes.front().x, xmax = mesh.nodes.front().x;
    for (const auto& p : mesh.nodes) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    const double tol = 1e-9 * std::max(1.0, xmax - xmin);
    if (xs < xmin - tol || xs > xmax + tol) throw OutOfDomain("station outside the domain");
    xs = std::clamp(xs, xmin, xmax);
    const bool axi = mode == GeometryMode::Axisymmetric;

    // Each element cut by the vertical line contributes one chord on which the
    // field and y are linear; elements are assigned by xmin <= xs < xmax, with
    // the last station taken from elements ending there.
    const bool at_end = xs >= xmax - tol;
    double num = 0.0, den = 0.0;
    for (const auto& el : mesh.elements) {
        std::array<Point2, 3> P;
        std::array<double, 3> F;
        for (int k = 0; k < 3; ++k) {
            P[static_cast<std::size_t>(k)] = mesh.nodes[static_cast<std::size_t>(el[static_cast<std::size_t>(k)])];
            F[static_cast<std::size_t>(k)] = field[static_cast<std::size_t>(el[static_cast<std::size_t>(k)])];
        }
        const double ex0 = std::min({P[0].x, P[1].x, P[2].x}), ex1 = std::max({P[0].x, P[1].x, P[2].x});
        if (at_end ? !(ex1 >= xmax - tol && ex0 < xmax - tol) : !(ex0 <= xs && xs < ex1)) continue;
        const double x = at_end ? xmax : xs;
        // Intersection of the line with the element boundary.
        std::vector<std::pair<double, double>> hits;  // (y, f)
        for (int k = 0; k < 3; ++k) {
            const auto& a = P[static_cast<std::size_t>(k)];
            const auto& b = P[static_cast<std::size_t>((k + 1) % 3)];
            const double fa = F[static_cast<std::size_t>(k)], fb = F[static_cast<std::size_t>((k + 1) % 3)];
            if (a.x == b.x) {
                if (std::abs(a.x - x) <= tol) {
                    hits.emplace_back(a.y, fa);
                    hits.emplace_back(b.y, fb);
                }
                continue;
            }
            const double t = (x - a.x) / (b.x - a.x);
            if (t < -1e-12 || t > 1.0 + 1e-12) continue;
            const double tc = std::clamp(t, 0.0, 1.0);
            hits.emplace_back(a.y + tc * (b.y - a.y), fa + tc * (fb - fa));
        }
        if (hits.size() < 2) continue;
        auto lo = *std::min_element(hits.begin(), hits.end());
        auto hi = *std::max_element(hits.begin(), hits.end());
        const double len = hi.first - lo.first;
        if (len <= 0.0) continue;
        if (axi) {
            // Simpson is exact: integrand f(y) y is quadratic on the chord.
            const double ym = 0.5 * (lo.first + hi.first), fm = 0.5 * (lo.second + hi.second);
            num += len / 6.0 * (lo.second * lo.first + 4.0 * fm * ym + hi.second * hi.first);
            den += len / 6.0 * (lo.first + 4.0 * ym + hi.first);
        } else {
            num += len * 0.5 * (lo.second + hi.second);
            den += len;
        }
    }
    if (!(den > 0.0)) throw OutOfDomain("station does not cut the mesh");
    return num / den;
}

double section_average_pressure(const FlowSolution& sol, const Mesh& mesh, double x_station, GeometryMode mode) {
    return section_average(sol.p, mesh, x_station, mode);
}

ObjectiveReport pressure_drop(const FlowSolution& sol, const Mesh& mesh, const NozzleDims& dims) {
    ObjectiveReport r;
    r.eval_x_inlet = dims.L_pressure;
    if (!sol.converged || sol.p.size() != mesh.nodes.size()) {
        r.feasible = false;
        return r;
    }
    r.p_inlet_avg = section_average_pressure(sol, mesh, dims.L_pressure, sol.geometry);
    r.p_outlet_avg = section_average_pressure(sol, mesh, dims.L_total, sol.geometry);
    r.delta_p = r.p_inlet_avg - r.p_outlet_avg;
    r.vortex = detect_recirculation(sol, mesh);
    if (!sol.T.empty()) r.outlet_T_min = outlet_temperature_profile(sol, mesh).T_min;
    r.mass_imbalance = mass_balance(sol, mesh).relative_imbalance();
    return r;
}

double relative_improvement(double dp_opt, double dp_baseline) {
    if (!(dp_baseline > 0.0)) throw DomainError("baseline pressure drop must be positive");
    return 1.0 - dp_opt / dp_baseline;
}

}  // namespace nozzle
