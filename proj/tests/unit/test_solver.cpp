#include <doctest.h>

#include "../oracles/flows.hpp"
#include "../oracles/oracles.hpp"
#include "nozzle/errors.hpp"
#include "nozzle/objective.hpp"
#include "nozzle/solver.hpp"

#include <algorithm>
#include <cmath>

using namespace nozzle;

namespace {

Mesh channel(double length, double height, double h) {
    MeshOptions o;
    o.h = h;
    return generate_mesh(build_straight_profile(length, height), -1.0, -1.0, o);
}

SolverConfig newtonian(double eta) {
    SolverConfig cfg;
    cfg.law = ViscosityLaw::Newtonian;
    cfg.newtonian_eta = eta;
    cfg.solve_heat = false;
    return cfg;
}

}  // namespace

TEST_CASE("newtonian pipe matches hagen-poiseuille") {
    const auto r = flows::newtonian_pipe(0.025);
    MESSAGE("dp " << r.dp << " exact " << r.dp_exact << " in " << r.seconds << " s");
    CHECK(std::abs(r.dp / r.dp_exact - 1.0) < 0.02);
    CHECK(r.mass_imbalance <= 5e-3);
}

TEST_CASE("power-law pipe matches the analytic solution") {
    const auto r = flows::power_law_pipe(0.025);
    MESSAGE("dp " << r.dp << " exact " << r.dp_exact << " in " << r.seconds << " s");
    CHECK(std::abs(r.dp / r.dp_exact - 1.0) < 0.03);
    CHECK(r.mass_imbalance <= 5e-3);
}

TEST_CASE("newtonian pipe is mesh converged") {
    const auto coarse = flows::newtonian_pipe(0.025);
    const auto fine = flows::newtonian_pipe(0.0125);
    CHECK(std::abs(fine.dp / coarse.dp - 1.0) < 0.01);
}

TEST_CASE("pressure falls monotonically along the axis of a developed pipe") {
    const double R = 0.25, L = 5.0;
    const Mesh mesh = channel(L, R, 0.05);
    BoundaryConditions bc;
    bc.inlet_profile = [&](double y) { return oracle::poiseuille_profile(1.0, R, y); };
    const FlowSolution s = solve_gnf(mesh, bc, CrossWlfParams{}, newtonian(1000.0));
    std::vector<std::pair<double, double>> axis;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        if (mesh.nodes[i].y == 0.0) axis.emplace_back(mesh.nodes[i].x, s.p[i]);
    }
    std::sort(axis.begin(), axis.end());
    REQUIRE(axis.size() > 10);
    for (std::size_t k = 1; k < axis.size(); ++k) CHECK(axis[k].second < axis[k - 1].second);
}

TEST_CASE("isothermal heat problem stays uniform") {
    const NozzleDims d;
    const Mesh mesh = generate_mesh(build_angle_profile(d, 45.0), d, 0.4, 0.5);
    BoundaryConditions bc;
    bc.u_in = 1.0;
    bc.T_in = 503.0;
    bc.T_wall = 503.0;
    SolverConfig cfg;
    cfg.viscous_heating = false;
    const FlowSolution s = solve_gnf(mesh, bc, CrossWlfParams{}, cfg);
    REQUIRE(s.converged);
    for (double T : s.T) CHECK(std::abs(T - 503.0) < 1e-6);
    const auto prof = outlet_temperature_profile(s, mesh, 13);
    CHECK(prof.samples.size() == 13);
    for (const auto& [y, T] : prof.samples) CHECK(std::abs(T - 503.0) < 1e-6);
    CHECK(mass_balance(s, mesh).relative_imbalance() <= 5e-3);
}

TEST_CASE("straight channel has no recirculation") {
    const Mesh mesh = channel(5.0, 0.25, 0.05);
    BoundaryConditions bc;
    const FlowSolution s = solve_gnf(mesh, bc, CrossWlfParams{}, newtonian(1000.0));
    const auto rec = detect_recirculation(s, mesh);
    CHECK_FALSE(rec.has_vortex);
    CHECK(rec.vortex_area == 0.0);
    CHECK(rec.centers.empty());
}

TEST_CASE("giesekus couette flow matches steady shear") {
    const auto r = flows::giesekus_couette(0.05);
    MESSAGE("errors " << r.err_xx << " " << r.err_xy << " " << r.err_yy << " in " << r.seconds << " s");
    CHECK(r.err_xx < 0.02);
    CHECK(r.err_xy < 0.02);
    CHECK(r.err_yy < 0.02);
    CHECK(r.mass_imbalance <= 5e-3);
}

TEST_CASE("viscoelastic solve with zero relaxation time is newtonian") {
    const auto r = flows::newtonian_limit(45.0, 0.4, 0.5);
    CHECK(r.u_err <= 1e-6);
    CHECK(r.p_err <= 1e-6);
    CHECK(r.mass_imbalance <= 5e-3);
}

TEST_CASE("small relaxation time approaches the newtonian solution under refinement") {
    // The three-field discretization at lambda -> 0 differs from the eliminated
    // Newtonian system only by discretization error, which must shrink with h.
    const NozzleDims d;
    BoundaryConditions bc;
    bc.u_in = 10.0;
    double prev = INFINITY;
    for (const auto& [h, grading] : {std::pair{0.4, 0.5}, std::pair{0.2, 0.25}}) {
        const Mesh mesh = generate_mesh(build_angle_profile(d, 45.0), d, h, grading);
        GiesekusParams gp;
        gp.lambda = 0.0;
        const FlowSolution n = solve_viscoelastic(mesh, bc, gp, SolverConfig{});
        gp.lambda = 1e-4;
        const FlowSolution s = solve_viscoelastic(mesh, bc, gp, SolverConfig{});
        REQUIRE(s.converged);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            num += std::pow(s.u[i] - n.u[i], 2) + std::pow(s.v[i] - n.v[i], 2);
            den += n.u[i] * n.u[i] + n.v[i] * n.v[i];
        }
        const double rms = std::sqrt(num / den);
        const double dp_n = pressure_drop(n, mesh, d).delta_p, dp_s = pressure_drop(s, mesh, d).delta_p;
        MESSAGE("h " << h << " rms velocity difference " << rms << ", dp " << dp_s << " vs " << dp_n);
        CHECK(rms < prev);
        prev = rms;
        if (h < 0.3) {
            CHECK(rms < 0.03);
            CHECK(std::abs(dp_s / dp_n - 1.0) < 0.05);
        }
    }
}

TEST_CASE("continuation trace walks to the target parameters") {
    const NozzleDims d;
    const Mesh mesh = generate_mesh(build_angle_profile(d, 45.0), d, 0.4, 0.5);
    BoundaryConditions bc;
    bc.u_in = 2.0;
    GiesekusParams gp;
    gp.lambda = 0.05;
    const FlowSolution s = solve_viscoelastic(mesh, bc, gp, SolverConfig{});
    REQUIRE(s.converged);
    REQUIRE_FALSE(s.continuation_trace.empty());
    CHECK(s.continuation_trace.back().lambda == doctest::Approx(gp.lambda));
    CHECK(s.continuation_trace.back().alpha_G == doctest::Approx(gp.alpha_G));
    for (std::size_t k = 1; k < s.continuation_trace.size(); ++k) {
        CHECK(s.continuation_trace[k].lambda > s.continuation_trace[k - 1].lambda);
    }
    CHECK(mass_balance(s, mesh).relative_imbalance() <= 5e-3);
}

TEST_CASE("default continuation schedule") {
    GiesekusParams gp;
    SolverConfig cfg;
    const auto st = default_continuation(gp, cfg);
    REQUIRE(st.size() == 8);
    CHECK(st.front().lambda == doctest::Approx(gp.lambda / 16.0));
    CHECK(st.front().alpha_G == doctest::Approx(0.25));
    CHECK(st.back().lambda == doctest::Approx(gp.lambda));
    CHECK(st.back().alpha_G == doctest::Approx(gp.alpha_G));
    for (std::size_t k = 1; k < st.size(); ++k) {
        CHECK(st[k].lambda / st[k - 1].lambda == doctest::Approx(st[1].lambda / st[0].lambda));
    }
}

TEST_CASE("failed continuation reports the last good stage") {
    const NozzleDims d;
    const Mesh mesh = generate_mesh(build_angle_profile(d, 45.0), d, 0.4, 0.5);
    BoundaryConditions bc;
    bc.u_in = 10.0;
    SolverConfig cfg;
    cfg.max_newton_iters = 1;
    cfg.max_stage_halvings = 1;
    try {
        solve_viscoelastic(mesh, bc, GiesekusParams{}, cfg);
        FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
        CHECK(e.last_good_stage() == -1);
        CHECK_FALSE(e.residual_history().empty());
    }
}

TEST_CASE("boundary conditions and configs are validated") {
    BoundaryConditions bc;
    bc.u_in = -1.0;
    CHECK_FALSE(bc.violations(false).empty());
    bc.u_in = 1.0;
    bc.T_wall = 250.0;
    bc.T_in = 293.0;
    CHECK_FALSE(bc.violations(true).empty());
    CHECK(bc.violations(false).empty());

    SolverConfig cfg;
    cfg.relaxation = 0.0;
    CHECK_FALSE(cfg.violations().empty());
    cfg.relaxation = 1.0;
    cfg.tol_nl = 0.0;
    CHECK_FALSE(cfg.violations().empty());

    const Mesh mesh = channel(5.0, 0.25, 0.1);
    BoundaryConditions bad;
    bad.u_in = 0.0;
    CHECK_THROWS_AS(solve_gnf(mesh, bad, CrossWlfParams{}, newtonian(1000.0)), ValidationError);
    GiesekusParams gp;
    gp.alpha_G = 0.7;
    CHECK_THROWS_AS(solve_viscoelastic(mesh, BoundaryConditions{}, gp, SolverConfig{}), ValidationError);
}
