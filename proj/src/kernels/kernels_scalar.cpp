#include "nozzle/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace nozzle::kernels {

void shear_rate_scalar(const GradientBatch& g, std::size_t n, double gamma_min, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double exx = g.dudx[i], eyy = g.dvdy[i], ezz = g.hoop ? g.hoop[i] : 0.0;
        const double exy = 0.5 * (g.dudy[i] + g.dvdx[i]);
        const double s = 2.0 * (exx * exx + eyy * eyy + ezz * ezz + 2.0 * exy * exy);
        out[i] = std::max(std::sqrt(s), gamma_min);
    }
}

void cross_wlf_scalar(const double* gamma_dot, const double* T, std::size_t n, const CrossWlfParams& p, double* eta) {
    const double m = 1.0 - p.n;
    for (std::size_t i = 0; i < n; ++i) {
        const double dT = T[i] - p.T_ref;
        const double eta0 = p.D1 * std::exp(-p.A1 * dT / (p.A2 + dT));
        const double x = eta0 * gamma_dot[i] / p.tau_star;
        eta[i] = x > 0.0 ? eta0 / (1.0 + std::exp(m * std::log(x))) : eta0;
    }
}

}  // namespace nozzle::kernels
