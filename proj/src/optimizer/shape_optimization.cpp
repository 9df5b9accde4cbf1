#include "nozzle/shape_optimization.hpp"

#include "nozzle/errors.hpp"

#include <filesystem>

namespace nozzle {

const char* to_string(ModelKind m) {
    return m == ModelKind::ViscousGnf ? "viscous" : "viscoelastic";
}

CaseResult solve_case(const FlowCase& fc, const ProfileParams& params) {
    CaseResult out;
    const BoundaryProfile profile = build_profile(fc.dims, params);
    out.mesh = generate_mesh(profile, fc.dims, fc.mesh);
    if (fc.model == ModelKind::ViscousGnf) {
        SolverConfig cfg = fc.solver;
        cfg.geometry = GeometryMode::Axisymmetric;
        out.solution = solve_gnf(out.mesh, fc.bc, fc.cross_wlf, cfg);
    } else {
        out.solution = solve_viscoelastic(out.mesh, fc.bc, fc.giesekus, fc.solver);
    }
    out.report = pressure_drop(out.solution, out.mesh, fc.dims);
    if (!out.report.feasible) throw NoConvergence("flow solve did not converge");
    return out;
}

ProfileEvaluator case_evaluator(const FlowCase& fc) {
    return [fc](const ProfileParams& params) { return solve_case(fc, params).report; };
}

namespace {

// Runs the optimizer, recording every evaluation with its full report.
template <class ToParams>
OptResult run_logged(OptProblem prob, const ProfileEvaluator& eval, ToParams to_params, const ShapeSettings& s,
                     std::vector<ShapeEvaluation>& log) {
    prob.budget = s.budget;
    prob.stagnation_window = s.stagnation_window;
    prob.checkpoint_path = s.checkpoint_path;
    prob.checkpoint_every = s.checkpoint_every;
    prob.objective = [&](const std::vector<double>& x) {
        ShapeEvaluation ev;
        ev.params = to_params(x);
        try {
            ev.report = eval(ev.params);
            ev.ok = ev.report.feasible;
            if (!ev.ok) ev.error = "infeasible evaluation";
        } catch (const std::exception& e) {
            ev.error = e.what();
        }
        log.push_back(ev);
        if (!ev.ok) throw Error(ev.error);
        return ev.report.delta_p;
    };
    if (s.resume && !s.checkpoint_path.empty() && std::filesystem::exists(s.checkpoint_path)) {
        prob.objective = replaying_objective(read_checkpoint(s.checkpoint_path), prob.objective);
    }
    return optimize(prob);
}

}  // namespace

AngleOptimum optimize_angle(const ProfileEvaluator& eval, double alpha0, const ShapeSettings& settings) {
    if (!(alpha0 >= settings.alpha_lo && alpha0 <= settings.alpha_hi)) {
        throw InfeasibleStart("initial angle " + std::to_string(alpha0) + " outside the angle bounds");
    }
    OptProblem prob;
    prob.dim = 1;
    prob.lower = {settings.alpha_lo};
    prob.upper = {settings.alpha_hi};
    prob.x0 = {alpha0};
    prob.tol_x = settings.tol_x;
    AngleOptimum out;
    out.opt = run_logged(
        prob, eval, [](const std::vector<double>& x) { return ProfileParams{AngleParams{x[0]}}; }, settings,
        out.log);
    out.alpha_opt = out.opt.x_best[0];
    out.dp_opt = out.opt.f_best;
    return out;
}

SplineOptimum optimize_spline(const ProfileEvaluator& eval, const NozzleDims& dims, double seed_alpha,
                              std::size_t n_ctrl, int degree, const ShapeSettings& settings,
                              bool freeze_ordinates) {
    if (n_ctrl < 3) throw ValidationError({"spline needs at least 3 control points"});
    const std::vector<double> y0 = taper_ordinates(dims, n_ctrl);
    const std::size_t n_free = freeze_ordinates ? 0 : n_ctrl - 2;
    const auto to_params = [=](const std::vector<double>& x) {
        SplineParams sp;
        sp.alpha_scale_deg = x[0];
        sp.degree = degree;
        sp.y_ctrl = y0;
        for (std::size_t i = 0; i < n_free; ++i) sp.y_ctrl[i + 1] = x[i + 1];
        return ProfileParams{sp};
    };

    OptProblem prob;
    prob.dim = 1 + n_free;
    prob.lower = {settings.alpha_lo};
    prob.upper = {settings.alpha_hi};
    prob.x0 = {seed_alpha};
    prob.tol_x = settings.tol_x;
    for (std::size_t i = 0; i < n_free; ++i) {
        prob.lower.push_back(dims.r_out());
        prob.upper.push_back(dims.r_in());
        prob.x0.push_back(y0[i + 1]);
    }
    // y_i - y_{i+1} >= margin for consecutive ordinates, fixed ends moved to b.
    for (std::size_t i = 0; i + 1 < n_ctrl && n_free > 0; ++i) {
        std::vector<double> row(prob.dim, 0.0);
        double rhs = settings.margin;
        if (i == 0) rhs -= y0.front();
        else row[i] = 1.0;
        if (i + 1 == n_ctrl - 1) rhs += y0.back();
        else row[i + 1] = -1.0;
        prob.A.push_back(row);
        prob.b.push_back(rhs);
    }

    SplineOptimum out;
    out.opt = run_logged(prob, eval, to_params, settings, out.log);
    out.params_opt = std::get<SplineParams>(to_params(out.opt.x_best));
    out.dp_opt = out.opt.f_best;
    return out;
}

}  // namespace nozzle
