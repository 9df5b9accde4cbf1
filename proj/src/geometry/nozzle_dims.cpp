#include "nozzle/errors.hpp"
#include "nozzle/geometry.hpp"

#include <cmath>
#include <numbers>

namespace nozzle {

std::vector<std::string> NozzleDims::violations() const {
    std::vector<std::string> out;
    const auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be > 0");
    };
    positive(L_total, "L_total");
    positive(L_heat, "L_heat");
    positive(L_out, "L_out");
    positive(L_pressure, "L_pressure");
    positive(d_in, "d_in");
    positive(d_out, "d_out");
    if (!(d_out < d_in)) out.push_back("d_out must be smaller than d_in");
    if (!(L_out < L_total)) out.push_back("L_out must be smaller than L_total");
    if (!(L_heat <= L_total)) out.push_back("L_heat must not exceed L_total");
    if (!(L_pressure < L_total)) out.push_back("L_pressure must be smaller than L_total");
    return out;
}

void NozzleDims::validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
}

double taper_length(const NozzleDims& dims, double alpha_deg) {
    if (!(alpha_deg >= kMinHalfAngleDeg && alpha_deg <= kMaxHalfAngleDeg)) {
        throw GeometryInfeasible("half-angle " + std::to_string(alpha_deg) +
                                 " deg outside [5, 90]");
    }
    // tan() near 90 deg is ~1e16, not infinity; snap the step case to zero length.
    if (alpha_deg >= kMaxHalfAngleDeg - 1e-12) return 0.0;
    const double alpha = alpha_deg * std::numbers::pi / 180.0;
    return (dims.r_in() - dims.r_out()) / std::tan(alpha);
}

std::vector<double> taper_ordinates(const NozzleDims& dims, std::size_t n_ctrl) {
    std::vector<double> y(n_ctrl);
    for (std::size_t i = 0; i < n_ctrl; ++i) {
        const double s = n_ctrl > 1 ? static_cast<double>(i) / static_cast<double>(n_ctrl - 1) : 0.0;
        y[i] = dims.r_in() + s * (dims.r_out() - dims.r_in());
    }
    y.front() = dims.r_in();
    y.back() = dims.r_out();
    return y;
}

}  // namespace nozzle
