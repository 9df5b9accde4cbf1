#pragma once

#include <cstddef>

#include "nozzle/materials.hpp"

namespace nozzle::kernels {

// Velocity-gradient components at a batch of points, structure-of-arrays.
// hoop is u_r / r for axisymmetric flow and must be zero for planar flow.
struct GradientBatch {
    const double* dudx = nullptr;
    const double* dudy = nullptr;
    const double* dvdx = nullptr;
    const double* dvdy = nullptr;
    const double* hoop = nullptr;
};

// gamma_dot = sqrt(2 eps:eps), clamped below by gamma_min.
using ShearRateFn = void (*)(const GradientBatch& g, std::size_t n, double gamma_min, double* out);
// Cross-WLF viscosity for each (gamma_dot, T); the caller keeps T above the WLF pole.
using CrossWlfFn = void (*)(const double* gamma_dot, const double* T, std::size_t n, const CrossWlfParams& p,
                            double* eta);

struct KernelTable {
    ShearRateFn shear_rate;
    CrossWlfFn cross_wlf;
    const char* name;
};

// Reference implementations.
void shear_rate_scalar(const GradientBatch& g, std::size_t n, double gamma_min, double* out);
void cross_wlf_scalar(const double* gamma_dot, const double* T, std::size_t n, const CrossWlfParams& p, double* eta);

// AVX2/FMA implementations; only callable when the CPU supports them.
bool avx2_available();
void shear_rate_avx2(const GradientBatch& g, std::size_t n, double gamma_min, double* out);
void cross_wlf_avx2(const double* gamma_dot, const double* T, std::size_t n, const CrossWlfParams& p, double* eta);

// Best table for this CPU, chosen once. Setting NOZZLE_FORCE_SCALAR in the
// environment pins the scalar table.
const KernelTable& active_kernels();
const KernelTable& scalar_kernels();

}  // namespace nozzle::kernels
