#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "nozzle/materials.hpp"
#include "nozzle/mesh.hpp"

namespace nozzle {

enum class GeometryMode { Axisymmetric, Planar };

// Viscosity law used by the generalized Newtonian path. PowerLaw and
// Newtonian exist for verification against closed-form pipe flows.
enum class ViscosityLaw { CrossWlf, PowerLaw, Newtonian };

struct BoundaryConditions {
    double u_in = 1.0;     // uniform inlet axial velocity [mm/s]
    double T_wall = 503.0; // heated wall [K]
    double T_in = 293.0;   // inlet [K]
    // Optional inlet profile u(y) [mm/s]; replaces the uniform value when set.
    std::function<double(double)> inlet_profile;
    // Tangential (axial) velocity of Wall and HeatedWall edges [mm/s].
    double wall_velocity = 0.0;
    // Treat the Axis edges as a fixed no-slip wall (channel verification flows).
    bool axis_no_slip = false;

    std::vector<std::string> violations(bool thermal) const;
};

struct ContinuationStage {
    double lambda = 0.0;
    double alpha_G = 0.0;
};

struct SolverConfig {
    GeometryMode geometry = GeometryMode::Axisymmetric;
    double tol_nl = 1e-6;
    int max_iters = 200;
    double relaxation = 0.7;  // Picard under-relaxation (GNF path)

    // Generalized Newtonian options.
    ViscosityLaw law = ViscosityLaw::CrossWlf;
    double newtonian_eta = 1000.0;  // [Pa s] for ViscosityLaw::Newtonian
    double power_law_K = 1e4;       // consistency [Pa s^n]
    double power_law_n = 0.25;
    bool solve_heat = true;
    bool viscous_heating = true;  // dissipation source eta gamma_dot^2
    // Viscosity is evaluated at max(T, T_visc_floor); cold material below the
    // WLF pole is treated as the reference-temperature melt.
    double T_visc_floor = 373.0;
    double gamma_min = 1e-10;  // [1/s]
    bool advection = true;

    // Stabilization constants for tau = [c1 eta / h^2 + c2 rho |u| / h]^-1.
    double c1 = 4.0;
    double c2 = 2.0;
    // Weight of the strain-rate compatibility term of the viscoelastic path.
    double c3 = 0.5;

    // Viscoelastic continuation. Empty schedule means the default geometric
    // ramp of `continuation_steps` stages from lambda/16 to lambda with alpha_G
    // moving from `alpha_G_start` to the target value.
    std::vector<ContinuationStage> continuation;
    int continuation_steps = 8;
    double alpha_G_start = 0.25;
    int max_newton_iters = 30;
    // The step between schedule stages adapts to Newton effort; the solve gives
    // up once it has been halved this many times below one schedule interval.
    int max_stage_halvings = 6;
    // Called after every continuation attempt with the Newton iterations it took.
    std::function<void(const ContinuationStage&, int newton_iters, bool converged)> on_stage;

    std::vector<std::string> violations() const;
};

// Default schedule for the given target parameters.
std::vector<ContinuationStage> default_continuation(const GiesekusParams& target, const SolverConfig& cfg);

enum class FlowModel { GeneralizedNewtonian, Viscoelastic };

struct FlowSolution {
    FlowModel model = FlowModel::GeneralizedNewtonian;
    GeometryMode geometry = GeometryMode::Axisymmetric;
    std::vector<double> u;  // axial velocity [mm/s]
    std::vector<double> v;  // transverse velocity [mm/s]
    std::vector<double> p;  // [Pa]
    std::vector<double> T;  // [K], generalized Newtonian only
    std::vector<std::array<double, 3>> sigma;  // polymeric stress xx, xy, yy [Pa]
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;
    std::vector<ContinuationStage> continuation_trace;  // stages that converged
    double u_ref = 0.0;  // inlet velocity scale [mm/s]
};

// Axisymmetric (or planar) generalized Newtonian flow with heat transport.
FlowSolution solve_gnf(const Mesh& mesh, const BoundaryConditions& bc, const CrossWlfParams& mat,
                       const SolverConfig& cfg);

// Isothermal Giesekus flow, planar. The polymer stress is carried as the
// matrix logarithm of the conformation tensor, which keeps the conformation
// positive definite at high Weissenberg numbers. The solution of each
// continuation stage seeds the next one. `initial` optionally supplies the
// starting velocity and pressure on the same mesh.
FlowSolution solve_viscoelastic(const Mesh& mesh, const BoundaryConditions& bc, const GiesekusParams& mat,
                                const SolverConfig& cfg, const FlowSolution* initial = nullptr);

struct Recirculation {
    bool has_vortex = false;
    double vortex_area = 0.0;  // [mm^2]
    std::vector<Point2> centers;
};

// Backflow regions (u_x < -threshold * u_ref) that touch a wall.
Recirculation detect_recirculation(const FlowSolution& sol, const Mesh& mesh, double threshold = 1e-3);

struct OutletTemperature {
    std::vector<std::pair<double, double>> samples;  // (y [mm], T [K])
    double T_min = 0.0;
};

OutletTemperature outlet_temperature_profile(const FlowSolution& sol, const Mesh& mesh, std::size_t n_samples = 21);

struct MassBalance {
    double q_in = 0.0;   // [mm^3/s] axisymmetric, [mm^2/s] planar
    double q_out = 0.0;
    double relative_imbalance() const;
};

MassBalance mass_balance(const FlowSolution& sol, const Mesh& mesh);

// Legacy VTK point data: velocity, pressure, and T or polymeric stress.
void write_solution_vtk(const std::string& path, const Mesh& mesh, const FlowSolution& sol);
// One row per nonlinear iteration.
void write_residual_csv(const std::string& path, const FlowSolution& sol);

}  // namespace nozzle
