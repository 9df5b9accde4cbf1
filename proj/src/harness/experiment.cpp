#include "nozzle/errors.hpp"
#include "nozzle/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace nozzle {

namespace fs = std::filesystem;

namespace {

constexpr double kPaPerKpa = 1e3;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Runs job(i) for i in [0, n) on up to `workers` threads.
template <class Job>
void parallel_for(std::size_t n, std::size_t workers, Job job) {
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) job(i);
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(workers, n); ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

void write_evaluations_csv(const fs::path& path, const std::vector<ShapeEvaluation>& log) {
    std::ofstream os(path);
    os << "index,alpha_deg,y_ctrl_mm,status,delta_p,pressure_unit,vortex,outlet_T_min_K,mass_imbalance\n";
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& ev = log[i];
        std::string alpha, yc;
        if (const auto* a = std::get_if<AngleParams>(&ev.params)) {
            alpha = fmt(a->alpha_deg);
        } else {
            const auto& s = std::get<SplineParams>(ev.params);
            alpha = fmt(s.alpha_scale_deg);
            for (std::size_t k = 0; k < s.y_ctrl.size(); ++k) yc += (k ? ";" : "") + fmt(s.y_ctrl[k]);
        }
        os << i << ',' << alpha << ',' << yc << ',' << (ev.ok ? "ok" : "failed") << ','
           << (ev.ok ? fmt(ev.report.delta_p / kPaPerKpa) : "") << ",kPa," << (ev.report.vortex.has_vortex ? 1 : 0)
           << ',' << (ev.report.outlet_T_min ? fmt(*ev.report.outlet_T_min) : "") << ','
           << fmt(ev.report.mass_imbalance) << '\n';
    }
}

void export_fields(const fs::path& dir, const std::string& stem, const CaseResult& r, const FlowCase& fc,
                   const ProfileParams& params) {
    write_solution_vtk((dir / (stem + ".vtk")).string(), r.mesh, r.solution);
    write_residual_csv((dir / (stem + "_residuals.csv")).string(), r.solution);
    write_profile_polyline((dir / (stem + "_profile.txt")).string(), build_profile(fc.dims, params));
}

std::string csv_safe(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

ResultRow run_point(const ExperimentConfig& cfg, double u_in, double d_out, const fs::path& dir) {
    ResultRow row;
    row.feeding_rate = u_in;
    row.d_out = d_out;
    try {
        fs::create_directories(dir);
        const FlowCase fc = flow_case(cfg, u_in, d_out);
        const ProfileEvaluator eval = case_evaluator(fc);
        const ProfileParams base{AngleParams{cfg.baseline_alpha}};
        const CaseResult baseline = solve_case(fc, base);
        export_fields(dir, "baseline", baseline, fc, base);
        ShapeSettings settings = cfg.optimizer;
        settings.checkpoint_path = (dir / "checkpoint.txt").string();

        ProfileParams best;
        double dp_opt = 0.0;
        std::vector<ShapeEvaluation> log;
        if (cfg.parametrization == Parametrization::Angle) {
            AngleOptimum opt = optimize_angle(eval, cfg.alpha0, settings);
            if (cfg.multistart) {
                settings.checkpoint_path = (dir / "checkpoint_multistart.txt").string();
                AngleOptimum other = optimize_angle(eval, cfg.multistart_alpha, settings);
                const std::size_t total = opt.opt.n_evals + other.opt.n_evals;
                std::vector<ShapeEvaluation> merged = std::move(opt.log);
                merged.insert(merged.end(), other.log.begin(), other.log.end());
                if (other.dp_opt < opt.dp_opt) opt = std::move(other);
                opt.log = std::move(merged);
                opt.opt.n_evals = total;
            }
            row.alpha_opt = opt.alpha_opt;
            dp_opt = opt.dp_opt;
            row.n_evals = opt.opt.n_evals;
            row.termination = to_string(opt.opt.termination);
            best = AngleParams{opt.alpha_opt};
            log = std::move(opt.log);
        } else {
            SplineOptimum opt = optimize_spline(eval, fc.dims, cfg.alpha0, cfg.n_ctrl, cfg.degree, settings);
            row.alpha_opt = opt.params_opt.alpha_scale_deg;
            row.y_ctrl = opt.params_opt.y_ctrl;
            dp_opt = opt.dp_opt;
            row.n_evals = opt.opt.n_evals;
            row.termination = to_string(opt.opt.termination);
            best = opt.params_opt;
            log = std::move(opt.log);
        }
        write_evaluations_csv(dir / "evaluations.csv", log);
        const CaseResult optimum = solve_case(fc, best);
        export_fields(dir, "optimum", optimum, fc, best);

        row.dp_baseline_kpa = baseline.report.delta_p / kPaPerKpa;
        row.dp_opt_kpa = dp_opt / kPaPerKpa;
        // Recomputed from the reported columns so every row is self-consistent.
        row.improvement = relative_improvement(row.dp_opt_kpa, row.dp_baseline_kpa);
        row.vortex = optimum.report.vortex.has_vortex;
        row.outlet_T_min = optimum.report.outlet_T_min.value_or(0.0);
        row.mass_imbalance = optimum.report.mass_imbalance;
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = csv_safe(e.what());
    }
    return row;
}

std::string timestamp() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

void write_results_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
    os << "model,parametrization,feeding_rate_mm_s,d_out_mm,status,alpha_opt_deg,y_ctrl_mm,dp_baseline,dp_opt,"
          "pressure_unit,improvement,vortex,outlet_T_min_K,mass_imbalance,n_evals,termination,error\n";
    for (const auto& r : rows) {
        std::string yc;
        for (std::size_t k = 0; k < r.y_ctrl.size(); ++k) yc += (k ? ";" : "") + fmt(r.y_ctrl[k]);
        os << to_string(cfg.model) << ',' << to_string(cfg.parametrization) << ',' << fmt(r.feeding_rate) << ','
           << fmt(r.d_out) << ',' << (r.ok ? "ok" : "failed") << ',';
        if (r.ok) {
            os << fmt(r.alpha_opt) << ',' << yc << ',' << fmt(r.dp_baseline_kpa) << ',' << fmt(r.dp_opt_kpa)
               << ",kPa," << fmt(r.improvement) << ',' << (r.vortex ? 1 : 0) << ','
               << (r.outlet_T_min > 0.0 ? fmt(r.outlet_T_min) : "") << ',' << fmt(r.mass_imbalance) << ','
               << r.n_evals << ',' << r.termination << ",\n";
        } else {
            os << ",,,,kPa,,,,,,," << r.error << '\n';
        }
    }
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    if (const auto v = cfg.violations(); !v.empty()) throw ValidationError(v);
    const fs::path root(cfg.output_dir);
    fs::create_directories(root);
    {
        std::ofstream os(root / "config.ini");
        write_config(os, cfg);
    }
    const std::string started = timestamp();
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::pair<double, double>> points;
    const std::vector<double> diameters = cfg.outlet_diameters.empty() ? std::vector<double>{cfg.dims.d_out}
                                                                       : cfg.outlet_diameters;
    for (double u : cfg.feeding_rates) {
        for (double d : diameters) points.emplace_back(u, d);
    }
    std::vector<ResultRow> rows(points.size());
    parallel_for(points.size(), cfg.workers, [&](std::size_t i) {
        const fs::path dir = root / ("point_" + std::to_string(i));
        rows[i] = run_point(cfg, points[i].first, points[i].second, dir);
    });

    {
        std::ofstream os(root / "results.csv");
        write_results_csv(os, cfg, rows);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream meta(root / "metadata.txt");
    meta << "name = " << cfg.name << "\nstarted = " << started << "\nfinished = " << timestamp()
         << "\nwall_seconds = " << secs << "\nseed = " << cfg.seed << "\nworkers = " << cfg.workers
         << "\npoints = " << rows.size() << '\n';
    return rows;
}

void write_gallery_csv(std::ostream& os, const std::vector<GalleryRow>& rows) {
    os << "alpha_deg,status,delta_p,pressure_unit,vortex,vortex_area_mm2,outlet_T_min_K,mass_imbalance,error\n";
    for (const auto& r : rows) {
        os << fmt(r.alpha) << ',' << (r.ok ? "ok" : "failed") << ',';
        if (r.ok) {
            os << fmt(r.dp_kpa) << ",kPa," << (r.vortex ? 1 : 0) << ',' << fmt(r.vortex_area) << ','
               << (r.outlet_T_min > 0.0 ? fmt(r.outlet_T_min) : "") << ',' << fmt(r.mass_imbalance) << ",\n";
        } else {
            os << ",kPa,,,,," << r.error << '\n';
        }
    }
}

std::vector<GalleryRow> flow_field_gallery(const ExperimentConfig& cfg, const std::vector<double>& angles) {
    if (const auto v = cfg.violations(); !v.empty()) throw ValidationError(v);
    const fs::path root(cfg.output_dir);
    fs::create_directories(root);
    const double d_out = cfg.outlet_diameters.empty() ? cfg.dims.d_out : cfg.outlet_diameters.front();
    const FlowCase fc = flow_case(cfg, cfg.feeding_rates.front(), d_out);
    std::vector<GalleryRow> rows(angles.size());
    parallel_for(angles.size(), cfg.workers, [&](std::size_t i) {
        GalleryRow& row = rows[i];
        row.alpha = angles[i];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const ProfileParams params{AngleParams{angles[i]}};
            const CaseResult r = solve_case(fc, params);
            char stem[32];
            std::snprintf(stem, sizeof stem, "alpha_%g", angles[i]);
            export_fields(root, stem, r, fc, params);
            row.dp_kpa = r.report.delta_p / kPaPerKpa;
            row.vortex = r.report.vortex.has_vortex;
            row.vortex_area = r.report.vortex.vortex_area;
            row.outlet_T_min = r.report.outlet_T_min.value_or(0.0);
            row.mass_imbalance = r.report.mass_imbalance;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = csv_safe(e.what());
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
    std::ofstream os(root / "gallery.csv");
    write_gallery_csv(os, rows);
    return rows;
}

}  // namespace nozzle
