#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace nozzle {

// Derivative-free minimization of a black-box objective over
// lower <= x <= upper and A x >= b (rows of A paired with entries of b).
struct OptProblem {
    std::size_t dim = 0;
    std::vector<double> lower, upper;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    // May throw or return a non-finite value; the point is then recorded as infeasible.
    std::function<double(const std::vector<double>&)> objective;
    std::vector<double> x0;
    std::size_t budget = 100;
    // Trust-region radius floor in the units of x; <= 0 selects 1e-4 x range.
    double tol_x = 0.0;
    // Initial radius in the units of x; <= 0 selects 0.1 x range.
    double initial_radius = 0.0;
    // Stop after this many consecutive evaluations that improve f_best by
    // less than stagnation_tol (relative); 0 selects 3 x dim.
    std::size_t stagnation_window = 0;
    double stagnation_tol = 1e-8;
    // A failed evaluation scores penalty_factor x |incumbent|.
    double penalty_factor = 10.0;
    // Optional plain-text history written every checkpoint_every evaluations.
    std::string checkpoint_path;
    std::size_t checkpoint_every = 1;
};

enum class Termination { RadiusFloor, Budget, Stagnation };
const char* to_string(Termination t);

struct Evaluation {
    std::vector<double> x;
    double f = 0.0;
    bool feasible = true;
};

struct OptResult {
    std::vector<double> x_best;
    double f_best = 0.0;
    std::size_t n_evals = 0;
    std::vector<Evaluation> history;
    Termination termination = Termination::Budget;
    // Largest interpolation mismatch of any surrogate built during the run,
    // relative to max(1, |f|).
    double max_model_mismatch = 0.0;
};

// Throws InfeasibleStart when x0 violates a bound or constraint, and
// ValidationError for inconsistent problem data.
OptResult optimize(const OptProblem& problem);

// History file: one line per evaluation, "feasible f x_1 ... x_n" in %.17g.
void write_checkpoint(const std::string& path, const std::vector<Evaluation>& history);
std::vector<Evaluation> read_checkpoint(const std::string& path);

// Objective wrapper that returns recorded values for points already present
// in a history, so a deterministic run replays up to the checkpoint without
// calling the expensive evaluator.
std::function<double(const std::vector<double>&)> replaying_objective(
    std::vector<Evaluation> history, std::function<double(const std::vector<double>&)> objective);

}  // namespace nozzle
