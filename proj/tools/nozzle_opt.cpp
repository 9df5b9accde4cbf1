#include "nozzle/errors.hpp"
#include "nozzle/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

using namespace nozzle;

namespace {

struct Common {
    std::string config_path;
    std::string preset_name;
    std::string output_dir;
    std::optional<std::size_t> workers;
    std::optional<unsigned> seed;
    std::optional<double> h;
    std::optional<double> grading;
    std::optional<double> feeding_rate;
    std::optional<std::size_t> budget;
    bool resume = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config_path, "experiment config file");
    app->add_option("-p,--preset", c.preset_name, "named preset used when no config file is given");
    app->add_option("-o,--output", c.output_dir, "output directory");
    app->add_option("-j,--workers", c.workers, "parallel sweep points");
    app->add_option("--seed", c.seed, "seed recorded with the run");
    app->add_option("--mesh-h", c.h, "mesh size away from the contraction [mm]");
    app->add_option("--grading", c.grading, "mesh size factor near the contraction");
    app->add_option("-u,--feeding-rate", c.feeding_rate, "run a single feeding rate [mm/s]");
    app->add_option("--budget", c.budget, "optimizer evaluation budget");
    app->add_flag("--resume", c.resume, "replay evaluations from existing checkpoints");
}

ExperimentConfig load(const Common& c, const std::string& default_preset) {
    ExperimentConfig cfg = c.config_path.empty() ? preset(c.preset_name.empty() ? default_preset : c.preset_name)
                                                 : validate_config(c.config_path);
    if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
    if (c.workers) cfg.workers = *c.workers;
    if (c.seed) cfg.seed = *c.seed;
    if (c.h) cfg.mesh.h = *c.h;
    if (c.grading) cfg.mesh.grading = *c.grading;
    if (c.feeding_rate) cfg.feeding_rates = {*c.feeding_rate};
    if (c.budget) cfg.optimizer.budget = *c.budget;
    cfg.optimizer.resume = c.resume;
    if (const auto v = cfg.violations(); !v.empty()) throw ValidationError(v);
    return cfg;
}

int report(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg) {
    write_results_csv(std::cout, cfg, rows);
    int failed = 0;
    for (const auto& r : rows) failed += r.ok ? 0 : 1;
    if (failed) std::fprintf(stderr, "%d of %zu sweep points failed\n", failed, rows.size());
    return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pressure-loss shape optimization of extrusion nozzle contractions"};
    app.require_subcommand(1);

    Common angle_opts, spline_opts, sweep_opts, gallery_opts;
    auto* angle = app.add_subcommand("optimize-angle", "optimize the contraction half-angle");
    add_common(angle, angle_opts);
    double alpha0 = -1.0;
    angle->add_option("--alpha0", alpha0, "initial angle [deg]");

    auto* spline = app.add_subcommand("optimize-spline", "optimize a spline contraction seeded by an angle");
    add_common(spline, spline_opts);
    double seed_alpha = -1.0;
    std::size_t n_ctrl = 0;
    spline->add_option("--seed-alpha", seed_alpha, "angle of the initial straight taper [deg]");
    spline->add_option("--n-ctrl", n_ctrl, "control points including both ends");

    auto* sweep = app.add_subcommand("sweep", "run the configured sweep");
    add_common(sweep, sweep_opts);

    auto* gallery = app.add_subcommand("gallery", "solve fixed angles and export flow fields");
    add_common(gallery, gallery_opts);
    std::vector<double> angles;
    gallery->add_option("--angles", angles, "half-angles [deg]")->delimiter(',');

    auto* validate = app.add_subcommand("validate", "check a config file and report every problem");
    std::string validate_path;
    validate->add_option("config", validate_path, "config file")->required();

    auto* show = app.add_subcommand("preset", "print a preset config");
    std::string show_name;
    show->add_option("name", show_name, "preset name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*angle) {
            ExperimentConfig cfg = load(angle_opts, "viscoelastic");
            cfg.parametrization = Parametrization::Angle;
            if (alpha0 > 0.0) cfg.alpha0 = alpha0;
            return report(run_experiment(cfg), cfg);
        }
        if (*spline) {
            ExperimentConfig cfg = load(spline_opts, "viscoelastic-spline");
            cfg.parametrization = Parametrization::Spline;
            if (seed_alpha > 0.0) cfg.alpha0 = seed_alpha;
            if (n_ctrl > 0) cfg.n_ctrl = n_ctrl;
            return report(run_experiment(cfg), cfg);
        }
        if (*sweep) {
            const ExperimentConfig cfg = load(sweep_opts, "viscous");
            return report(run_experiment(cfg), cfg);
        }
        if (*gallery) {
            const ExperimentConfig cfg = load(gallery_opts, "gallery");
            const auto rows = flow_field_gallery(cfg, angles.empty() ? cfg.gallery_angles : angles);
            write_gallery_csv(std::cout, rows);
            for (const auto& r : rows) {
                if (!r.ok) return 2;
            }
            return 0;
        }
        if (*validate) {
            validate_config(validate_path);
            std::cout << validate_path << ": ok\n";
            return 0;
        }
        if (*show) {
            write_config(std::cout, preset(show_name));
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
