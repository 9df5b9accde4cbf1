#include "nozzle/materials.hpp"

#include "nozzle/errors.hpp"

#include <cmath>

namespace nozzle {

std::vector<std::string> CrossWlfParams::violations() const {
    std::vector<std::string> out;
    if (!(n > 0.0 && n < 1.0)) out.emplace_back("cross.n must lie in (0, 1)");
    if (!(D1 > 0.0)) out.emplace_back("cross.D1 must be positive");
    if (!(tau_star > 0.0)) out.emplace_back("cross.tau_star must be positive");
    if (!(A2 > 0.0)) out.emplace_back("cross.A2 must be positive");
    if (!(A1 >= 0.0)) out.emplace_back("cross.A1 must be non-negative");
    if (!(rho > 0.0)) out.emplace_back("cross.rho must be positive");
    if (!(cp > 0.0)) out.emplace_back("cross.cp must be positive");
    if (!(kappa > 0.0)) out.emplace_back("cross.kappa must be positive");
    return out;
}

double zero_shear_viscosity(double T, const CrossWlfParams& p) {
    const double dT = T - p.T_ref;
    if (!(p.A2 + dT > 0.0)) throw DomainError("temperature at or below the WLF pole");
    return p.D1 * std::exp(-p.A1 * dT / (p.A2 + dT));
}

double cross_viscosity(double gamma_dot, double T, const CrossWlfParams& p) {
    if (!(gamma_dot >= 0.0)) throw DomainError("negative shear rate");
    const double eta0 = zero_shear_viscosity(T, p);
    if (gamma_dot == 0.0) return eta0;
    return eta0 / (1.0 + std::pow(eta0 * gamma_dot / p.tau_star, 1.0 - p.n));
}

}  // namespace nozzle
