#include "nozzle/kernels/kernels.hpp"

#include <cstdlib>

namespace nozzle::kernels {

namespace {

KernelTable pick() {
    const char* force = std::getenv("NOZZLE_FORCE_SCALAR");
    if ((force == nullptr || *force == '\0' || *force == '0') && avx2_available()) {
        return {shear_rate_avx2, cross_wlf_avx2, "avx2"};
    }
    return scalar_kernels();
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable t{shear_rate_scalar, cross_wlf_scalar, "scalar"};
    return t;
}

const KernelTable& active_kernels() {
    static const KernelTable t = pick();
    return t;
}

}  // namespace nozzle::kernels
