#include "nozzle/errors.hpp"
#include "nozzle/solver.hpp"

#include <cstdio>
#include <fstream>

namespace nozzle {

namespace {

void scalar_field(std::ofstream& os, const char* name, const std::vector<double>& f) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    char buf[40];
    for (double x : f) {
        std::snprintf(buf, sizeof buf, "%.10g\n", x);
        os << buf;
    }
}

}  // namespace

void write_solution_vtk(const std::string& path, const Mesh& mesh, const FlowSolution& sol) {
    const std::size_t n = mesh.nodes.size();
    if (sol.u.size() != n || sol.v.size() != n || sol.p.size() != n) {
        throw ValidationError({"solution fields do not match the mesh"});
    }
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "# vtk DataFile Version 3.0\nnozzle flow field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << n << " double\n";
    char buf[96];
    for (const auto& p : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%.10g %.10g 0\n", p.x, p.y);
        os << buf;
    }
    os << "CELLS " << mesh.elements.size() << ' ' << 4 * mesh.elements.size() << '\n';
    for (const auto& e : mesh.elements) os << "3 " << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
    os << "CELL_TYPES " << mesh.elements.size() << '\n';
    for (std::size_t i = 0; i < mesh.elements.size(); ++i) os << "5\n";

    os << "POINT_DATA " << n << '\n';
    os << "VECTORS velocity double\n";
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%.10g %.10g 0\n", sol.u[i], sol.v[i]);
        os << buf;
    }
    scalar_field(os, "pressure", sol.p);
    if (sol.T.size() == n) scalar_field(os, "temperature", sol.T);
    if (sol.sigma.size() == n) {
        const char* names[3] = {"sigma_xx", "sigma_xy", "sigma_yy"};
        for (std::size_t c = 0; c < 3; ++c) {
            std::vector<double> f(n);
            for (std::size_t i = 0; i < n; ++i) f[i] = sol.sigma[i][c];
            scalar_field(os, names[c], f);
        }
    }
}

void write_residual_csv(const std::string& path, const FlowSolution& sol) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "iteration,relative_residual\n";
    char buf[64];
    for (std::size_t i = 0; i < sol.residual_history.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6e\n", i, sol.residual_history[i]);
        os << buf;
    }
}

}  // namespace nozzle
