// Acceptance run: one PASS/FAIL line per criterion, details alongside.
// Exit status is the number of failed criteria.

#include "../oracles/flows.hpp"
#include "../oracles/oracles.hpp"
#include "nozzle/harness.hpp"
#include "nozzle/materials.hpp"
#include "nozzle/optimizer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <variant>

using namespace nozzle;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    int id = 0;
    bool pass = false;
    std::string detail;
};

class Report {
public:
    explicit Report(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void add(int id, bool pass, const std::string& detail) {
        verdicts_.push_back({id, pass, detail});
        std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
    }

    // Every converged solve feeds the mass-conservation criterion.
    void mass(const std::string& what, double imbalance) {
        if (imbalance > worst_mass_) {
            worst_mass_ = imbalance;
            worst_what_ = what;
        }
        ++n_mass_;
    }

    double worst_mass() const { return worst_mass_; }
    const std::string& worst_what() const { return worst_what_; }
    std::size_t n_mass() const { return n_mass_; }
    const fs::path& dir() const { return dir_; }

    int finish() {
        std::stable_sort(verdicts_.begin(), verdicts_.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
        std::ofstream os(dir_ / "summary.txt");
        int failed = 0;
        std::printf("\n");
        for (const auto& v : verdicts_) {
            const std::string line = "criterion " + std::to_string(v.id) + ": " + (v.pass ? "PASS" : "FAIL");
            std::printf("%s\n", line.c_str());
            os << line << "  " << v.detail << '\n';
            failed += v.pass ? 0 : 1;
        }
        return failed;
    }

private:
    fs::path dir_;
    std::vector<Verdict> verdicts_;
    double worst_mass_ = 0.0;
    std::string worst_what_;
    std::size_t n_mass_ = 0;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// Evaluator that also records the mass balance of every successful solve.
ProfileEvaluator tracked(const FlowCase& fc, Report& rep, const std::string& tag) {
    const ProfileEvaluator inner = case_evaluator(fc);
    return [inner, &rep, tag](const ProfileParams& p) {
        const ObjectiveReport r = inner(p);
        if (r.feasible) rep.mass(tag, r.mass_imbalance);
        return r;
    };
}

void write_log(const fs::path& path, const std::vector<ShapeEvaluation>& log) {
    std::ofstream os(path);
    os << "k,alpha_deg,ok,dp_pa,vortex\n";
    for (std::size_t k = 0; k < log.size(); ++k) {
        const auto& e = log[k];
        double a = 0.0;
        if (const auto* ap = std::get_if<AngleParams>(&e.params)) a = ap->alpha_deg;
        if (const auto* sp = std::get_if<SplineParams>(&e.params)) a = sp->alpha_scale_deg;
        os << k << ',' << a << ',' << (e.ok ? 1 : 0) << ',' << fmt("%.9g", e.report.delta_p) << ','
           << (e.report.vortex.has_vortex ? 1 : 0) << '\n';
    }
}

void pipes(Report& rep) {
    const auto nw = flows::newtonian_pipe(0.025);
    rep.mass("newtonian pipe", nw.mass_imbalance);
    const double e1 = std::abs(nw.dp / nw.dp_exact - 1.0);
    rep.add(1, e1 < 0.02 && nw.seconds < 30.0,
            fmt("newtonian pipe dp %.6g Pa vs %.6g Pa, error %.3f%% (< 2%%), %.1f s (< 30 s), %zu nodes", nw.dp,
                nw.dp_exact, 100 * e1, nw.seconds, nw.nodes));

    const auto pl = flows::power_law_pipe(0.025);
    rep.mass("power-law pipe", pl.mass_imbalance);
    const double e2 = std::abs(pl.dp / pl.dp_exact - 1.0);
    rep.add(2, e2 < 0.03 && pl.seconds < 60.0,
            fmt("power-law pipe dp %.6g Pa vs %.6g Pa, error %.3f%% (< 3%%), %.1f s (< 60 s)", pl.dp, pl.dp_exact,
                100 * e2, pl.seconds));
}

void cross_wlf(Report& rep) {
    const CrossWlfParams p;
    const double eta0 = cross_viscosity(0.0, 373.0, p);
    const bool exact = std::abs(eta0 - 3.317e9) <= 1e-12 * 3.317e9;
    bool monotone = true;
    double prev = INFINITY;
    for (int k = 0; k < 100; ++k) {
        const double g = std::pow(10.0, -3.0 + 9.0 * k / 99.0);
        const double eta = cross_viscosity(g, 503.0, p);
        monotone = monotone && eta < prev && eta > 0.0;
        prev = eta;
    }
    rep.add(3, exact && monotone,
            fmt("eta(0, 373 K) = %.10g Pa s, strictly decreasing over 100 rates in [1e-3, 1e6] 1/s: %s", eta0,
                monotone ? "yes" : "no"));
}

void couette(Report& rep) {
    const auto r = flows::giesekus_couette(0.05);
    rep.mass("couette", r.mass_imbalance);
    const GiesekusParams gp;
    double worst = 0.0;
    for (double g : {0.1, 1.0, 5.0, 10.0, 50.0, 200.0}) {
        const ShearStress a = giesekus_steady_shear(g, gp);
        const auto b = oracle::giesekus_shear_ode(g, gp.lambda, gp.alpha_G, gp.eta_p());
        const auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); };
        worst = std::max({worst, rel(a.xx, b.xx), rel(a.xy, b.xy), rel(a.yy, b.yy)});
    }
    const double e = std::max({r.err_xx, r.err_xy, r.err_yy});
    rep.add(4, e < 0.02 && worst <= 1e-6,
            fmt("couette stress error xx %.3f%% xy %.3f%% yy %.3f%% (< 2%%); algebraic vs time-march %.2e (<= 1e-6)",
                100 * r.err_xx, 100 * r.err_xy, 100 * r.err_yy, worst));
}

void newtonian_limit(Report& rep) {
    const auto r = flows::newtonian_limit(50.0, 0.2, 0.25);
    rep.mass("lambda = 0 nozzle", r.mass_imbalance);
    rep.add(5, r.u_err <= 1e-6 && r.p_err <= 1e-6,
            fmt("lambda = 0 vs newtonian: velocity %.2e, pressure %.2e (<= 1e-6)", r.u_err, r.p_err));
}

void optimizer_suite(Report& rep) {
    const auto t0 = Clock::now();
    std::ostringstream d;
    bool ok = true;

    OptProblem q;
    q.dim = 2;
    q.lower = {-10.0, -10.0};
    q.upper = {10.0, 10.0};
    q.x0 = {0.0, 0.0};
    q.budget = 40;
    q.objective = [](const std::vector<double>& x) { return std::pow(x[0] - 1.0, 2) + std::pow(x[1] - 2.0, 2); };
    const auto rq = optimize(q);
    const double eq = std::hypot(rq.x_best[0] - 1.0, rq.x_best[1] - 2.0);
    ok = ok && eq <= 1e-6 && rq.n_evals <= 40;
    d << fmt("quadratic %.1e in %zu evals; ", eq, rq.n_evals);

    OptProblem v;
    v.dim = 2;
    v.lower = {0.0, 0.0};
    v.upper = {1.0, 1.0};
    v.x0 = {0.8, 0.3};
    v.A = {{1.0, -1.0}};
    v.b = {0.0};
    v.budget = 60;
    const auto lin = [](double a, double b) { return a + b; };
    v.objective = [&](const std::vector<double>& x) { return lin(x[0], x[1]); };
    const auto rv = optimize(v);
    const auto grid = oracle::grid_min_2d(lin, [](double a, double b) { return a - b > 0.0; }, 0.0, 1.0, 1e-3);
    const double ev = std::hypot(rv.x_best[0] - grid[0], rv.x_best[1] - grid[1]);
    ok = ok && rv.f_best <= grid[2] + 1e-9 && ev <= 2e-3;
    d << fmt("vertex f %.2e vs grid %.2e, distance %.1e; ", rv.f_best, grid[2], ev);

    OptProblem r;
    r.dim = 2;
    r.lower = {-5.0, -5.0};
    r.upper = {5.0, 5.0};
    r.x0 = {-1.2, 1.0};
    r.budget = 2000;
    r.tol_x = 1e-9;
    r.stagnation_window = 100;
    r.objective = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    const auto rr = optimize(r);
    const double er = std::max(std::abs(rr.x_best[0] - 1.0), std::abs(rr.x_best[1] - 1.0));
    ok = ok && er <= 1e-4;
    d << fmt("rosenbrock %.1e in %zu evals; ", er, rr.n_evals);

    const double secs = since(t0);
    d << fmt("%.2f s (< 10 s)", secs);
    rep.add(7, ok && secs < 10.0, d.str());
}

struct AngleRun {
    double alpha = 0.0;
    CaseResult result;
    double seconds = 0.0;
};

// Returns the 30 degree solution for reuse as the improvement baseline.
double viscoelastic_angles(Report& rep) {
    const ExperimentConfig cfg = preset("viscoelastic");
    const FlowCase fc = flow_case(cfg, 10.0, cfg.dims.d_out);
    const double ref[] = {1.005e6, 0.946e6, 0.951e6, 0.944e6};
    const double angles[] = {30.0, 50.0, 70.0, 90.0};
    std::vector<AngleRun> runs;
    const auto t0 = Clock::now();
    std::ostringstream d;
    bool within = true, vortices = true;
    for (int k = 0; k < 4; ++k) {
        const auto t1 = Clock::now();
        AngleRun a{angles[k], solve_case(fc, AngleParams{angles[k]}), 0.0};
        a.seconds = since(t1);
        rep.mass("viscoelastic angle", a.result.report.mass_imbalance);
        const double dp = a.result.report.delta_p;
        const bool in = std::abs(dp / ref[k] - 1.0) <= 0.2;
        const bool want_vortex = angles[k] >= 70.0;
        within = within && in;
        vortices = vortices && a.result.report.vortex.has_vortex == want_vortex;
        d << fmt("%g deg %.4f MPa (ref %.3f, %+.1f%%) vortex %d; ", angles[k], dp / 1e6, ref[k] / 1e6,
                 100 * (dp / ref[k] - 1.0), a.result.report.vortex.has_vortex ? 1 : 0);
        std::printf("  viscoelastic %g deg: dp %.5f MPa, vortex %d, %.1f s\n", angles[k], dp / 1e6,
                    a.result.report.vortex.has_vortex ? 1 : 0, a.seconds);
        std::fflush(stdout);
        runs.push_back(std::move(a));
    }
    const double secs = since(t0);
    const bool order = runs[1].result.report.delta_p < runs[0].result.report.delta_p;
    d << fmt("dp(50) < dp(30): %s; %.0f s (<= 1800 s)", order ? "yes" : "no", secs);
    rep.add(8, within && order && vortices && secs <= 1800.0, d.str());
    return runs[0].result.report.delta_p;
}

AngleOptimum viscoelastic_optimum(Report& rep, double dp30) {
    const ExperimentConfig cfg = preset("viscoelastic");
    const FlowCase fc = flow_case(cfg, 10.0, cfg.dims.d_out);
    const auto t0 = Clock::now();
    AngleOptimum opt = optimize_angle(tracked(fc, rep, "viscoelastic angle optimization"), 50.0, cfg.optimizer);
    write_log(rep.dir() / "viscoelastic_angle_evaluations.csv", opt.log);
    const double imp = relative_improvement(opt.dp_opt, dp30);
    const bool a_ok = std::abs(opt.alpha_opt - 51.12) <= 5.0;
    const bool i_ok = std::abs(100 * imp - 5.95) <= 2.0;
    rep.add(9, a_ok && i_ok,
            fmt("alpha_opt %.2f deg (51.12 +- 5), dp %.5f MPa, improvement over 30 deg %.2f%% (5.95 +- 2), "
                "%zu evals, %s, %.0f s",
                opt.alpha_opt, opt.dp_opt / 1e6, 100 * imp, opt.opt.n_evals, to_string(opt.opt.termination),
                since(t0)));
    return opt;
}

void spline_dominance(Report& rep, const AngleOptimum& angle) {
    const ExperimentConfig cfg = preset("viscoelastic-spline");
    const FlowCase fc = flow_case(cfg, 10.0, cfg.dims.d_out);
    const auto t0 = Clock::now();
    const SplineOptimum sp = optimize_spline(tracked(fc, rep, "spline optimization"), fc.dims, angle.alpha_opt,
                                             cfg.n_ctrl, cfg.degree, cfg.optimizer);
    write_log(rep.dir() / "viscoelastic_spline_evaluations.csv", sp.log);
    rep.add(10, sp.dp_opt <= angle.dp_opt + 1e-9,
            fmt("spline %.6f MPa vs angle %.6f MPa, %zu evals, %.0f s", sp.dp_opt / 1e6, angle.dp_opt / 1e6,
                sp.opt.n_evals, since(t0)));
}

void viscous_trend(Report& rep) {
    const ExperimentConfig cfg = preset("viscous");
    const double rates[] = {0.67, 1.83, 2.83};
    const double ref[] = {69.90, 56.07, 31.73};
    double a[3];
    bool near = true;
    std::ostringstream d;
    for (int k = 0; k < 3; ++k) {
        const FlowCase fc = flow_case(cfg, rates[k], cfg.dims.d_out);
        const auto t0 = Clock::now();
        const AngleOptimum opt = optimize_angle(tracked(fc, rep, "viscous angle optimization"), cfg.alpha0,
                                                cfg.optimizer);
        write_log(rep.dir() / fmt("viscous_%g_evaluations.csv", rates[k]), opt.log);
        a[k] = opt.alpha_opt;
        near = near && std::abs(a[k] - ref[k]) <= 10.0;
        d << fmt("%g mm/s: %.2f deg (ref %.2f +- 10), %.4f MPa, %.0f s; ", rates[k], a[k], ref[k], opt.dp_opt / 1e6,
                 since(t0));
        std::printf("  viscous %g mm/s: alpha_opt %.2f deg, %zu evals\n", rates[k], a[k], opt.opt.n_evals);
        std::fflush(stdout);
    }
    const bool trend = a[2] < a[1] && a[1] < a[0] + 5.0;
    d << "trend " << (trend ? "holds" : "broken");
    rep.add(11, trend && near, d.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::string out = "acceptance_out";
    app.add_option("-o,--output", out, "directory for logs and the summary");
    CLI11_PARSE(app, argc, argv);

    Report rep(out);
    const auto guarded = [&](int id, const std::function<void()>& f) {
        try {
            f();
        } catch (const std::exception& e) {
            rep.add(id, false, std::string("error: ") + e.what());
        }
    };
    guarded(1, [&] { pipes(rep); });
    guarded(3, [&] { cross_wlf(rep); });
    guarded(4, [&] { couette(rep); });
    guarded(5, [&] { newtonian_limit(rep); });
    guarded(7, [&] { optimizer_suite(rep); });
    double dp30 = 0.0;
    guarded(8, [&] { dp30 = viscoelastic_angles(rep); });
    std::optional<AngleOptimum> angle;
    guarded(9, [&] {
        if (!(dp30 > 0.0)) throw std::runtime_error("no 30 degree baseline");
        angle = viscoelastic_optimum(rep, dp30);
    });
    guarded(10, [&] {
        if (!angle) throw std::runtime_error("no angle optimum to compare against");
        spline_dominance(rep, *angle);
    });
    guarded(11, [&] { viscous_trend(rep); });
    rep.add(6, rep.n_mass() > 0 && rep.worst_mass() <= 5e-3,
            fmt("worst relative imbalance %.2e (<= 5e-3) over %zu converged solves, at %s", rep.worst_mass(),
                rep.n_mass(), rep.worst_what().c_str()));
    return rep.finish();
}
