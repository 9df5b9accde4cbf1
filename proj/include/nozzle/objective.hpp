#pragma once

#include <optional>

#include "nozzle/geometry.hpp"
#include "nozzle/mesh.hpp"
#include "nozzle/solver.hpp"

namespace nozzle {

struct ObjectiveReport {
    double p_inlet_avg = 0.0;   // [Pa]
    double p_outlet_avg = 0.0;  // [Pa]
    double delta_p = 0.0;       // [Pa]
    double eval_x_inlet = 0.0;  // [mm]
    bool feasible = true;
    Recirculation vortex;
    std::optional<double> outlet_T_min;  // [K], generalized Newtonian only
    double mass_imbalance = 0.0;
};

// Area-weighted mean pressure over the cross-section x = x_station [mm]:
// weight 2 pi y (axisymmetric) or 1 (planar). Throws OutOfDomain outside [0, L].
double section_average_pressure(const FlowSolution& sol, const Mesh& mesh, double x_station, GeometryMode mode);
// Same average for an arbitrary nodal field.
double section_average(const std::vector<double>& field, const Mesh& mesh, double x_station, GeometryMode mode);

// Inlet average at x = L_pressure, outlet average at the outlet face.
// A non-converged solution yields feasible = false instead of an error.
ObjectiveReport pressure_drop(const FlowSolution& sol, const Mesh& mesh, const NozzleDims& dims);

// 1 - dp_opt / dp_baseline. Throws DomainError for a non-positive baseline.
double relative_improvement(double dp_opt, double dp_baseline);

// Penalty objective for failed evaluations: factor times the incumbent.
inline constexpr double kInfeasiblePenaltyFactor = 10.0;

}  // namespace nozzle
