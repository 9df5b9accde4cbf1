#pragma once

// Reference solutions written independently of the library code paths they check.

#include <array>
#include <functional>
#include <vector>

namespace oracle {

// Fully developed Newtonian pipe flow: pressure drop over length L [Pa] for
// mean velocity U [m/s], radius R [m], viscosity mu [Pa s].
double hagen_poiseuille_dp(double mu, double U, double R, double L);
// Same for a power-law fluid eta = K gamma^(n-1).
double power_law_pipe_dp(double K, double n, double U, double R, double L);
// Planar Poiseuille channel of half-height H: dp over L for mean velocity U.
double plane_poiseuille_dp(double mu, double U, double H, double L);
// Axial velocity of the parabolic pipe profile at radius r.
double poiseuille_profile(double U, double R, double r);

struct Stress {
    double xx, xy, yy;
};
// Giesekus steady simple shear from the closed-form viscometric functions
// (shear viscosity and first normal stress coefficient) plus the yy balance.
Stress giesekus_shear_closed_form(double gamma_dot, double lambda, double alpha, double eta_p);
// Homogeneous start-up of shear flow integrated with classical RK4 until the
// stress rate falls below tol (relative).
Stress giesekus_shear_ode(double gamma_dot, double lambda, double alpha, double eta_p, double tol = 1e-13);

// Dense grid minimum of f over [lo, hi]^2 restricted to feasible(x).
std::array<double, 3> grid_min_2d(const std::function<double(double, double)>& f,
                                  const std::function<bool(double, double)>& feasible, double lo, double hi,
                                  double step);

}  // namespace oracle
