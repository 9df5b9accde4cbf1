#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nozzle/geometry.hpp"
#include "nozzle/materials.hpp"
#include "nozzle/mesh.hpp"
#include "nozzle/objective.hpp"
#include "nozzle/optimizer.hpp"
#include "nozzle/solver.hpp"

namespace nozzle {

enum class ModelKind { ViscousGnf, Viscoelastic };
const char* to_string(ModelKind m);

// Everything needed to turn a profile into a pressure drop.
struct FlowCase {
    ModelKind model = ModelKind::ViscousGnf;
    NozzleDims dims;
    CrossWlfParams cross_wlf;
    GiesekusParams giesekus;
    BoundaryConditions bc;
    SolverConfig solver;
    MeshOptions mesh;
};

struct CaseResult {
    Mesh mesh;
    FlowSolution solution;
    ObjectiveReport report;
};

// Build, mesh, solve and evaluate. Throws on geometry, mesh or solver failure.
CaseResult solve_case(const FlowCase& fc, const ProfileParams& params);

// Black-box evaluation of one profile; throwing marks the point infeasible.
using ProfileEvaluator = std::function<ObjectiveReport(const ProfileParams&)>;
ProfileEvaluator case_evaluator(const FlowCase& fc);

struct ShapeSettings {
    std::size_t budget = 30;
    double alpha_lo = kMinHalfAngleDeg;
    double alpha_hi = kMaxHalfAngleDeg;
    // Radius floor in degrees for the angle, <= 0 for the optimizer default.
    double tol_x = 0.0;
    std::size_t stagnation_window = 0;
    double margin = kMonotonicityMargin;
    std::string checkpoint_path;
    std::size_t checkpoint_every = 1;
    // Resume from checkpoint_path when it exists.
    bool resume = false;
};

struct ShapeEvaluation {
    ProfileParams params;
    ObjectiveReport report;
    bool ok = false;
    std::string error;
};

struct AngleOptimum {
    double alpha_opt = 0.0;
    double dp_opt = 0.0;
    OptResult opt;
    std::vector<ShapeEvaluation> log;
};

struct SplineOptimum {
    SplineParams params_opt;
    double dp_opt = 0.0;
    OptResult opt;
    std::vector<ShapeEvaluation> log;
};

AngleOptimum optimize_angle(const ProfileEvaluator& eval, double alpha0, const ShapeSettings& settings);

// Design vector (alpha_scale, interior ordinates); end ordinates stay on r_in
// and r_out. Initial ordinates lie on the straight taper. With freeze_ordinates
// only alpha_scale moves.
SplineOptimum optimize_spline(const ProfileEvaluator& eval, const NozzleDims& dims, double seed_alpha,
                              std::size_t n_ctrl, int degree, const ShapeSettings& settings,
                              bool freeze_ordinates = false);

}  // namespace nozzle
