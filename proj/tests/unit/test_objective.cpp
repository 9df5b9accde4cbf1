#include <doctest.h>

#include "../oracles/oracles.hpp"
#include "nozzle/errors.hpp"
#include "nozzle/objective.hpp"

#include <cmath>

using namespace nozzle;

namespace {

Mesh nozzle_mesh(double alpha) {
    const NozzleDims d;
    return generate_mesh(build_angle_profile(d, alpha), d, 0.4, 0.5);
}

FlowSolution with_pressure(const Mesh& mesh, const std::function<double(double, double)>& p) {
    FlowSolution s;
    s.converged = true;
    s.u.assign(mesh.nodes.size(), 0.0);
    s.v.assign(mesh.nodes.size(), 0.0);
    for (const auto& n : mesh.nodes) s.p.push_back(p(n.x, n.y));
    return s;
}

}  // namespace

TEST_CASE("uniform pressure averages to itself") {
    const Mesh mesh = nozzle_mesh(30.0);
    const FlowSolution s = with_pressure(mesh, [](double, double) { return 4321.5; });
    for (double x : {0.0, 1.0, 7.3, 16.95, 18.0}) {
        CHECK(section_average_pressure(s, mesh, x, GeometryMode::Axisymmetric) == doctest::Approx(4321.5).epsilon(1e-12));
        CHECK(section_average_pressure(s, mesh, x, GeometryMode::Planar) == doctest::Approx(4321.5).epsilon(1e-12));
    }
    const auto rep = pressure_drop(s, mesh, NozzleDims{});
    CHECK(rep.feasible);
    CHECK(std::abs(rep.delta_p) < 1e-9);
}

TEST_CASE("linear pressure is averaged exactly") {
    const Mesh mesh = nozzle_mesh(50.0);
    const FlowSolution s = with_pressure(mesh, [](double x, double) { return -250.0 * x + 9000.0; });
    for (double x : {0.0, 2.5, 12.2, 17.5, 18.0}) {
        for (auto mode : {GeometryMode::Axisymmetric, GeometryMode::Planar}) {
            CHECK(section_average_pressure(s, mesh, x, mode) == doctest::Approx(-250.0 * x + 9000.0).epsilon(1e-12));
        }
    }
    const NozzleDims d;
    const auto rep = pressure_drop(s, mesh, d);
    CHECK(rep.eval_x_inlet == d.L_pressure);
    CHECK(rep.delta_p == doctest::Approx(250.0 * (d.L_total - d.L_pressure)).epsilon(1e-12));
    CHECK(rep.delta_p == doctest::Approx(rep.p_inlet_avg - rep.p_outlet_avg).epsilon(1e-15));
}

TEST_CASE("section average weights the radius in axisymmetric mode") {
    // p = y: planar mean y = R/2, axisymmetric mean = int y 2 pi y / int 2 pi y = 2R/3.
    const Mesh mesh = generate_mesh(build_straight_profile(2.0, 0.5), -1.0, -1.0, MeshOptions{});
    const FlowSolution s = with_pressure(mesh, [](double, double y) { return y; });
    CHECK(section_average_pressure(s, mesh, 1.0, GeometryMode::Planar) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(section_average_pressure(s, mesh, 1.0, GeometryMode::Axisymmetric) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("section average is linear and gauge invariant") {
    const Mesh mesh = nozzle_mesh(70.0);
    const auto f1 = [](double x, double y) { return std::sin(x) + y * y; };
    const auto f2 = [](double x, double y) { return x * y - 3.0; };
    const FlowSolution s1 = with_pressure(mesh, f1);
    const FlowSolution s2 = with_pressure(mesh, f2);
    const FlowSolution s12 = with_pressure(mesh, [&](double x, double y) { return 2.0 * f1(x, y) - 0.5 * f2(x, y); });
    const FlowSolution shifted = with_pressure(mesh, [&](double x, double y) { return f1(x, y) + 1e5; });
    const NozzleDims d;
    for (double x : {1.0, 9.0, 17.2}) {
        const auto mode = GeometryMode::Axisymmetric;
        const double lhs = section_average_pressure(s12, mesh, x, mode);
        const double rhs = 2.0 * section_average_pressure(s1, mesh, x, mode) - 0.5 * section_average_pressure(s2, mesh, x, mode);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    CHECK(pressure_drop(shifted, mesh, d).delta_p == doctest::Approx(pressure_drop(s1, mesh, d).delta_p).epsilon(1e-9));
}

TEST_CASE("stations outside the nozzle are rejected") {
    const Mesh mesh = nozzle_mesh(30.0);
    const FlowSolution s = with_pressure(mesh, [](double, double) { return 1.0; });
    CHECK_THROWS_AS(section_average_pressure(s, mesh, -0.1, GeometryMode::Planar), OutOfDomain);
    CHECK_THROWS_AS(section_average_pressure(s, mesh, 18.5, GeometryMode::Planar), OutOfDomain);
}

TEST_CASE("non-converged solutions are infeasible, not errors") {
    const Mesh mesh = nozzle_mesh(30.0);
    FlowSolution s = with_pressure(mesh, [](double x, double) { return 100.0 - x; });
    s.converged = false;
    const auto rep = pressure_drop(s, mesh, NozzleDims{});
    CHECK_FALSE(rep.feasible);
}

TEST_CASE("relative improvement") {
    CHECK(relative_improvement(5.0, 5.0) == 0.0);
    CHECK(relative_improvement(945.96, 1005.85) == doctest::Approx(0.0595).epsilon(2e-3));
    CHECK(relative_improvement(4153.73, 4411.27) == doctest::Approx(0.0584).epsilon(2e-3));
    CHECK(relative_improvement(4153.73e3, 4411.27e3) == doctest::Approx(relative_improvement(4153.73, 4411.27)).epsilon(1e-14));
    CHECK_THROWS_AS(relative_improvement(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(relative_improvement(1.0, -2.0), DomainError);
}

TEST_CASE("poiseuille pressure gradient between two stations") {
    const double R = 0.25, L = 5.0, eta = 1000.0;
    MeshOptions o;
    o.h = 0.025;
    const Mesh mesh = generate_mesh(build_straight_profile(L, R), -1.0, -1.0, o);
    BoundaryConditions bc;
    bc.inlet_profile = [&](double y) { return oracle::poiseuille_profile(1.0, R, y); };
    SolverConfig cfg;
    cfg.law = ViscosityLaw::Newtonian;
    cfg.newtonian_eta = eta;
    cfg.solve_heat = false;
    const FlowSolution s = solve_gnf(mesh, bc, CrossWlfParams{}, cfg);
    const double x1 = 1.0, x2 = 4.0;
    const double dp = section_average_pressure(s, mesh, x1, GeometryMode::Axisymmetric) -
                      section_average_pressure(s, mesh, x2, GeometryMode::Axisymmetric);
    const double exact = oracle::hagen_poiseuille_dp(eta, 1e-3, R * 1e-3, (x2 - x1) * 1e-3);
    CHECK(std::abs(dp / exact - 1.0) < 0.01);
}
