#include "nozzle/materials.hpp"

#include "nozzle/errors.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace nozzle {

std::vector<std::string> GiesekusParams::violations() const {
    std::vector<std::string> out;
    if (!(lambda >= 0.0)) out.emplace_back("giesekus.lambda must be non-negative");
    if (!(alpha_G > 0.0 && alpha_G <= 0.5)) out.emplace_back("giesekus.alpha_G must lie in (0, 0.5]");
    if (!(beta >= 0.0 && beta < 1.0)) out.emplace_back("giesekus.beta must lie in [0, 1)");
    if (!(eta_total > 0.0)) out.emplace_back("giesekus.eta_total must be positive");
    if (!(rho > 0.0)) out.emplace_back("giesekus.rho must be positive");
    return out;
}

std::array<double, 3> giesekus_shear_residual(const ShearStress& s, double g, const GiesekusParams& p) {
    const double lam = p.lambda, etap = p.eta_p();
    const double k = p.alpha_G * lam / etap;
    // Upper-convected terms for L = [[0, g], [0, 0]]: (L s + s L^T) has xx = 2 g s_xy, xy = g s_yy.
    return {s.xx - 2.0 * lam * g * s.xy + k * (s.xx * s.xx + s.xy * s.xy),
            s.xy - lam * g * s.yy + k * s.xy * (s.xx + s.yy) - etap * g,
            s.yy + k * (s.xy * s.xy + s.yy * s.yy)};
}

namespace {

Eigen::Matrix3d shear_jacobian(const ShearStress& s, double g, const GiesekusParams& p) {
    const double lam = p.lambda;
    const double k = p.alpha_G * lam / p.eta_p();
    Eigen::Matrix3d J;
    J << 1.0 + 2.0 * k * s.xx, -2.0 * lam * g + 2.0 * k * s.xy, 0.0,
        k * s.xy, 1.0 + k * (s.xx + s.yy), -lam * g + k * s.xy,
        0.0, 2.0 * k * s.xy, 1.0 + 2.0 * k * s.yy;
    return J;
}

bool newton(ShearStress& s, double g, const GiesekusParams& p) {
    const double scale = p.eta_p() * std::max(g, 1e-300) + 1e-300;
    for (int it = 0; it < 100; ++it) {
        const auto r = giesekus_shear_residual(s, g, p);
        const Eigen::Vector3d R(r[0], r[1], r[2]);
        const double norm = R.norm();
        if (norm <= 1e-14 * scale) return true;
        const Eigen::Vector3d d = shear_jacobian(s, g, p).fullPivLu().solve(-R);
        double step = 1.0;
        for (int ls = 0; ls < 40; ++ls) {
            const ShearStress t{s.xx + step * d[0], s.xy + step * d[1], s.yy + step * d[2]};
            const auto rt = giesekus_shear_residual(t, g, p);
            if (Eigen::Vector3d(rt[0], rt[1], rt[2]).norm() < (1.0 - 1e-4 * step) * norm) {
                s = t;
                break;
            }
            step *= 0.5;
            if (ls == 39) return false;
        }
    }
    const auto r = giesekus_shear_residual(s, g, p);
    return Eigen::Vector3d(r[0], r[1], r[2]).norm() <= 1e-10 * scale;
}

}  // namespace

ShearStress giesekus_steady_shear(double gamma_dot, const GiesekusParams& p) {
    if (!(gamma_dot >= 0.0)) throw DomainError("negative shear rate");
    if (gamma_dot == 0.0) return {};
    const double etap = p.eta_p();
    if (p.lambda == 0.0) return {0.0, etap * gamma_dot, 0.0};

    // Continuation from Wi = 0.1, where the Oldroyd-like guess is accurate.
    const double wi_target = p.lambda * gamma_dot;
    double g = std::min(gamma_dot, 0.1 / p.lambda);
    ShearStress s{2.0 * p.lambda * etap * g * g, etap * g, 0.0};
    double factor = 2.0;
    while (true) {
        ShearStress trial = s;
        // Scale the previous stress to the new rate as a predictor.
        if (!newton(trial, g, p)) {
            if (factor < 1.0 + 1e-6) throw NoConvergence("steady-shear root-finder failed at Wi=" + std::to_string(p.lambda * g));
            g /= factor;
            factor = std::sqrt(factor);
            g *= factor;
            continue;
        }
        s = trial;
        if (p.lambda * g >= wi_target) break;
        g = std::min(gamma_dot, g * factor);
    }
    return s;
}

double weissenberg_number(const GiesekusParams& p, double u_char, double l_char) {
    if (!(l_char > 0.0)) throw DomainError("characteristic length must be positive");
    return p.lambda * u_char / l_char;
}

}  // namespace nozzle
