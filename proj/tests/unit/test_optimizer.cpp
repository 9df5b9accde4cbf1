#include <doctest.h>

#include "../oracles/oracles.hpp"
#include "nozzle/errors.hpp"
#include "nozzle/optimizer.hpp"
#include "nozzle/shape_optimization.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace nozzle;

namespace {

OptProblem box2(double lo, double hi) {
    OptProblem p;
    p.dim = 2;
    p.lower = {lo, lo};
    p.upper = {hi, hi};
    return p;
}

// Feasible history entries only; f_best must be their minimum and x_best feasible.
void check_result_invariants(const OptProblem& p, const OptResult& r) {
    double best = INFINITY;
    for (const auto& ev : r.history) {
        if (ev.feasible) best = std::min(best, ev.f);
        for (std::size_t i = 0; i < p.dim; ++i) {
            CHECK(ev.x[i] >= p.lower[i]);
            CHECK(ev.x[i] <= p.upper[i]);
        }
        for (std::size_t k = 0; k < p.A.size(); ++k) {
            double ax = 0.0;
            for (std::size_t i = 0; i < p.dim; ++i) ax += p.A[k][i] * ev.x[i];
            CHECK(ax >= p.b[k] - 1e-12);
        }
    }
    CHECK(r.f_best == best);
    CHECK(r.n_evals == r.history.size());
    CHECK(r.n_evals <= p.budget);
    CHECK(r.max_model_mismatch <= 1e-10);
}

}  // namespace

TEST_CASE("quadratic bowl") {
    OptProblem p = box2(-10.0, 10.0);
    p.x0 = {0.0, 0.0};
    p.budget = 40;
    p.objective = [](const std::vector<double>& x) {
        return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0);
    };
    const auto r = optimize(p);
    CHECK(std::abs(r.x_best[0] - 1.0) <= 1e-6);
    CHECK(std::abs(r.x_best[1] - 2.0) <= 1e-6);
    CHECK(r.n_evals <= 40);
    check_result_invariants(p, r);
}

TEST_CASE("linear objective ends on the constraint vertex") {
    OptProblem p = box2(0.0, 1.0);
    p.x0 = {0.8, 0.3};
    p.A = {{1.0, -1.0}};
    p.b = {0.0};
    p.budget = 60;
    const auto f = [](double a, double b) { return a + b; };
    p.objective = [&](const std::vector<double>& x) { return f(x[0], x[1]); };
    const auto r = optimize(p);
    const auto grid = oracle::grid_min_2d(f, [](double a, double b) { return a - b > 0.0; }, 0.0, 1.0, 1e-3);
    CHECK(r.f_best <= grid[2] + 1e-9);
    CHECK(std::abs(r.x_best[0] - grid[0]) <= 2e-3);
    CHECK(std::abs(r.x_best[1] - grid[1]) <= 2e-3);
    check_result_invariants(p, r);
}

TEST_CASE("rosenbrock") {
    OptProblem p = box2(-5.0, 5.0);
    p.x0 = {-1.2, 1.0};
    p.budget = 2000;
    p.tol_x = 1e-9;
    p.stagnation_window = 100;
    p.objective = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    const auto r = optimize(p);
    CHECK(std::abs(r.x_best[0] - 1.0) <= 1e-4);
    CHECK(std::abs(r.x_best[1] - 1.0) <= 1e-4);
    check_result_invariants(p, r);
}

TEST_CASE("incumbent is monotone and runs are deterministic") {
    OptProblem p = box2(-3.0, 3.0);
    p.x0 = {2.0, -2.0};
    p.budget = 50;
    p.objective = [](const std::vector<double>& x) {
        return std::sin(x[0]) + 0.3 * x[0] * x[0] + std::cos(x[1]) * x[1] + 0.1 * x[1] * x[1];
    };
    const auto a = optimize(p);
    const auto b = optimize(p);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].x == b.history[i].x);
        CHECK(a.history[i].f == b.history[i].f);
    }
    double best = INFINITY;
    for (const auto& ev : a.history) {
        const double next = std::min(best, ev.f);
        CHECK(next <= best);
        best = next;
    }
    check_result_invariants(p, a);
}

TEST_CASE("failed evaluations are tolerated and penalized") {
    OptProblem p = box2(-2.0, 2.0);
    p.x0 = {1.5, 1.5};
    p.budget = 60;
    p.objective = [](const std::vector<double>& x) {
        if (x[0] + x[1] < -0.5) throw Error("solver diverged");
        return (x[0] - 0.2) * (x[0] - 0.2) + (x[1] - 0.1) * (x[1] - 0.1) + 1.0;
    };
    const auto r = optimize(p);
    CHECK(r.x_best[0] == doctest::Approx(0.2).epsilon(1e-3));
    CHECK(r.x_best[1] == doctest::Approx(0.1).epsilon(1e-3));
    for (const auto& ev : r.history) {
        if (!ev.feasible) CHECK(ev.f >= 10.0 * 1.0 - 1e-12);
    }
}

TEST_CASE("invalid problems are rejected") {
    OptProblem p = box2(0.0, 1.0);
    p.x0 = {2.0, 0.5};
    p.objective = [](const std::vector<double>&) { return 0.0; };
    CHECK_THROWS_AS(optimize(p), InfeasibleStart);
    p.x0 = {0.2, 0.5};
    p.A = {{1.0, -1.0}};
    p.b = {0.0};
    CHECK_THROWS_AS(optimize(p), InfeasibleStart);
    p.budget = 2;
    CHECK_THROWS_AS(optimize(p), ValidationError);
}

TEST_CASE("checkpoint round trip and replay") {
    const auto path = (std::filesystem::temp_directory_path() / "nozzle_ckpt_test.txt").string();
    OptProblem p = box2(-4.0, 4.0);
    p.x0 = {3.0, 3.0};
    p.budget = 25;
    p.checkpoint_path = path;
    int calls = 0;
    p.objective = [&](const std::vector<double>& x) {
        ++calls;
        return std::pow(x[0] + 1.0, 2) + 2.0 * std::pow(x[1] - 0.5, 2);
    };
    const auto full = optimize(p);
    const auto saved = read_checkpoint(path);
    REQUIRE(saved.size() == full.history.size());
    for (std::size_t i = 0; i < saved.size(); ++i) {
        CHECK(saved[i].x == full.history[i].x);
        CHECK(saved[i].f == full.history[i].f);
    }
    // Replay the first half, then continue live: identical history.
    std::vector<Evaluation> half(saved.begin(), saved.begin() + static_cast<long>(saved.size() / 2));
    calls = 0;
    auto live = p.objective;
    p.objective = replaying_objective(half, live);
    p.checkpoint_path.clear();
    const auto resumed = optimize(p);
    CHECK(calls == static_cast<int>(saved.size() - half.size()));
    REQUIRE(resumed.history.size() == full.history.size());
    for (std::size_t i = 0; i < saved.size(); ++i) CHECK(resumed.history[i].x == full.history[i].x);
    std::filesystem::remove(path);
}

TEST_CASE("angle optimization finds a planted minimum") {
    const ProfileEvaluator eval = [](const ProfileParams& pp) {
        ObjectiveReport r;
        const double a = std::get<AngleParams>(pp).alpha_deg;
        r.delta_p = (a - 60.0) * (a - 60.0) + 5.0;
        return r;
    };
    ShapeSettings s;
    s.tol_x = 1e-6;
    const auto opt = optimize_angle(eval, 50.0, s);
    CHECK(opt.alpha_opt == doctest::Approx(60.0).epsilon(1e-5));
    CHECK(opt.dp_opt == doctest::Approx(5.0));
    CHECK(opt.log.size() == opt.opt.n_evals);
    CHECK_THROWS_AS(optimize_angle(eval, 95.0, s), InfeasibleStart);
}

TEST_CASE("spline optimization keeps ordinates monotone and degenerates to the angle case") {
    const NozzleDims d;
    // Synthetic objective of the geometry: favours a concave wall and a 45 degree scale.
    const ProfileEvaluator eval = [&](const ProfileParams& pp) {
        const auto& sp = std::get<SplineParams>(pp);
        if (!monotonicity_feasible(sp, 0.0)) throw Error("non-monotone");
        ObjectiveReport r;
        r.delta_p = std::pow(sp.alpha_scale_deg - 45.0, 2);
        for (std::size_t i = 1; i + 1 < sp.y_ctrl.size(); ++i) r.delta_p += 50.0 * std::pow(sp.y_ctrl[i] - 0.9, 2);
        return r;
    };
    ShapeSettings s;
    s.budget = 120;
    const auto opt = optimize_spline(eval, d, 50.0, 5, 3, s);
    for (const auto& ev : opt.log) {
        const auto& sp = std::get<SplineParams>(ev.params);
        for (double res : monotonicity_constraints(sp)) CHECK(res >= s.margin - 1e-12);
    }
    CHECK(opt.dp_opt <= opt.opt.history.front().f);

    // Frozen ordinates: the same search as the angle optimizer.
    const ProfileEvaluator by_taper = [&](const ProfileParams& pp) {
        const double a = std::visit(
            [](const auto& v) {
                if constexpr (std::is_same_v<std::decay_t<decltype(v)>, AngleParams>) return v.alpha_deg;
                else return v.alpha_scale_deg;
            },
            pp);
        ObjectiveReport r;
        r.delta_p = std::pow(taper_length(d, a) - 1.0, 2) + 1.0;
        return r;
    };
    ShapeSettings t;
    const auto frozen = optimize_spline(by_taper, d, 50.0, 6, 3, t, true);
    const auto angle = optimize_angle(by_taper, 50.0, t);
    CHECK(frozen.params_opt.alpha_scale_deg == angle.alpha_opt);
    CHECK(frozen.dp_opt == angle.dp_opt);
}
