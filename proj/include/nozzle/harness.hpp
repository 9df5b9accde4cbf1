#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nozzle/shape_optimization.hpp"

namespace nozzle {

enum class Parametrization { Angle, Spline };
const char* to_string(Parametrization p);

struct ExperimentConfig {
    std::string name = "experiment";
    ModelKind model = ModelKind::ViscousGnf;
    Parametrization parametrization = Parametrization::Angle;
    NozzleDims dims;
    CrossWlfParams cross_wlf;
    GiesekusParams giesekus;
    double T_wall = 503.0;  // [K]
    double T_in = 293.0;    // [K]
    // Sweep: every feeding rate is run at every outlet diameter. An empty
    // diameter list means dims.d_out only.
    std::vector<double> feeding_rates;     // [mm/s]
    std::vector<double> outlet_diameters;  // [mm]
    double alpha0 = 30.0;          // optimizer start [deg]
    double baseline_alpha = 30.0;  // reference design for the improvement [deg]
    // Second angle start near the upper bound; the better optimum is kept.
    bool multistart = false;
    double multistart_alpha = 85.0;
    std::size_t n_ctrl = 6;
    int degree = 3;
    std::vector<double> gallery_angles;  // [deg]
    SolverConfig solver;
    MeshOptions mesh;
    ShapeSettings optimizer;
    std::string output_dir = "out";
    unsigned seed = 0;
    std::size_t workers = 1;

    std::vector<std::string> violations() const;
};

// Key/value file with [sections]; the schema is in the README.
ExperimentConfig parse_config(std::istream& is);
void write_config(std::ostream& os, const ExperimentConfig& cfg);
// Parse and check every invariant. Throws ParseError or ValidationError
// listing all problems at once.
ExperimentConfig validate_config(const std::string& path);

std::vector<std::string> preset_names();
// Throws ValidationError for an unknown name.
ExperimentConfig preset(const std::string& name);

FlowCase flow_case(const ExperimentConfig& cfg, double feeding_rate, double d_out);

struct ResultRow {
    double feeding_rate = 0.0;  // [mm/s]
    double d_out = 0.0;         // [mm]
    bool ok = false;
    std::string error;
    double alpha_opt = 0.0;  // [deg], alpha_scale for splines
    std::vector<double> y_ctrl;
    double dp_baseline_kpa = 0.0;
    double dp_opt_kpa = 0.0;
    double improvement = 0.0;
    bool vortex = false;
    double outlet_T_min = 0.0;  // [K], 0 when not computed
    double mass_imbalance = 0.0;
    std::size_t n_evals = 0;
    std::string termination;
};

// One row per sweep point in sweep order; per-point failures are recorded and
// the run continues. Writes results.csv, per-point field/profile/evaluation
// files and metadata.txt below cfg.output_dir.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);
void write_results_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

struct GalleryRow {
    double alpha = 0.0;
    bool ok = false;
    std::string error;
    double dp_kpa = 0.0;
    bool vortex = false;
    double vortex_area = 0.0;  // [mm^2]
    double outlet_T_min = 0.0;
    double mass_imbalance = 0.0;
    double seconds = 0.0;
};

// Solves at each angle for the first sweep point without optimization.
std::vector<GalleryRow> flow_field_gallery(const ExperimentConfig& cfg, const std::vector<double>& angles);
void write_gallery_csv(std::ostream& os, const std::vector<GalleryRow>& rows);

}  // namespace nozzle
