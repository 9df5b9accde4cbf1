#pragma once

#include <array>
#include <string>
#include <vector>

namespace nozzle {

// Cross shear thinning with WLF temperature shift. Defaults are a PLA grade.
// rho, cp and kappa are placeholders, not measured values for that grade.
struct CrossWlfParams {
    double tau_star = 1.009e5;  // critical shear stress [Pa]
    double n = 0.25;            // power-law index [-]
    double D1 = 3.317e9;        // zero-shear viscosity at T_ref [Pa s]
    double T_ref = 373.0;       // [K]
    double A1 = 20.19;          // [-]
    double A2 = 51.6;           // [K]
    double rho = 1250.0;        // [kg/m^3]
    double cp = 1800.0;         // [J/(kg K)]
    double kappa = 0.2;         // [W/(m K)]

    std::vector<std::string> violations() const;
    // Temperature at which the WLF denominator vanishes.
    double wlf_pole() const { return T_ref - A2; }
};

// Zero-shear viscosity eta0(T). Throws DomainError at or below the WLF pole.
double zero_shear_viscosity(double T, const CrossWlfParams& p);
// Cross viscosity eta(gamma_dot, T) [Pa s]. Throws DomainError for gamma_dot < 0
// or T at or below the WLF pole.
double cross_viscosity(double gamma_dot, double T, const CrossWlfParams& p);

// Giesekus parameters given as total viscosity and solvent ratio
// beta = eta_s / eta_p.
struct GiesekusParams {
    double lambda = 0.2;       // relaxation time [s]
    double alpha_G = 0.05;     // mobility factor [-]
    double beta = 0.15;        // eta_s / eta_p [-]
    double eta_total = 2000.0; // eta_s + eta_p [Pa s]
    double rho = 1250.0;       // [kg/m^3]

    double eta_p() const { return eta_total / (1.0 + beta); }
    double eta_s() const { return eta_total - eta_p(); }
    std::vector<std::string> violations() const;
};

// Polymeric stress in homogeneous steady simple shear u = (gamma_dot y, 0).
struct ShearStress {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

// Algebraic steady-shear solution, damped Newton with continuation in the
// shear rate. Throws NoConvergence when the root-finder stalls.
ShearStress giesekus_steady_shear(double gamma_dot, const GiesekusParams& p);
// Residual of the three steady-shear equations at a candidate stress.
std::array<double, 3> giesekus_shear_residual(const ShearStress& s, double gamma_dot, const GiesekusParams& p);

// Wi = lambda u_char / l_char; velocity and length share a unit (mm/s, mm).
double weissenberg_number(const GiesekusParams& p, double u_char, double l_char);

}  // namespace nozzle
