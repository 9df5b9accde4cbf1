#include <doctest.h>

#include "nozzle/kernels/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace nozzle;
using namespace nozzle::kernels;

namespace {

struct Batch {
    std::vector<double> a, b, c, d, hoop, gamma, T;
    explicit Batch(std::size_t n, unsigned seed) : a(n), b(n), c(n), d(n), hoop(n), gamma(n), T(n) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> mag(-6.0, 4.0), sgn(-1.0, 1.0), temp(330.0, 560.0);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = sgn(rng) * std::pow(10.0, mag(rng));
            b[i] = sgn(rng) * std::pow(10.0, mag(rng));
            c[i] = sgn(rng) * std::pow(10.0, mag(rng));
            d[i] = sgn(rng) * std::pow(10.0, mag(rng));
            hoop[i] = i % 3 == 0 ? 0.0 : sgn(rng) * std::pow(10.0, mag(rng));
            gamma[i] = i % 17 == 0 ? 0.0 : std::pow(10.0, mag(rng) + 1.0);
            T[i] = temp(rng);
        }
    }
    GradientBatch grads() const { return {a.data(), b.data(), c.data(), d.data(), hoop.data()}; }
};

}  // namespace

TEST_CASE("scalar shear rate matches the definition") {
    const double a = 1.0, b = 2.0, c = 3.0, d = -1.0, h = 0.5;
    const GradientBatch g{&a, &b, &c, &d, &h};
    double out = 0.0;
    shear_rate_scalar(g, 1, 0.0, &out);
    const double exy = 0.5 * (b + c);
    const double expected = std::sqrt(2.0 * (a * a + d * d + h * h + 2.0 * exy * exy));
    CHECK(out == doctest::Approx(expected).epsilon(1e-15));
    const double z = 0.0;
    const GradientBatch zero{&z, &z, &z, &z, &z};
    shear_rate_scalar(zero, 1, 1e-10, &out);
    CHECK(out == 1e-10);
}

TEST_CASE("scalar cross-WLF kernel matches the material law") {
    const CrossWlfParams p;
    const Batch in(257, 1);
    std::vector<double> eta(in.T.size());
    cross_wlf_scalar(in.gamma.data(), in.T.data(), in.T.size(), p, eta.data());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        CHECK(eta[i] == doctest::Approx(cross_viscosity(in.gamma[i], in.T[i], p)).epsilon(1e-13));
    }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    if (!avx2_available()) {
        MESSAGE("AVX2 not available; skipping equivalence check");
        return;
    }
    const CrossWlfParams p;
    // Odd sizes exercise the scalar tail.
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 1001u}) {
        const Batch in(n, static_cast<unsigned>(n));
        std::vector<double> s(n), v(n);
        shear_rate_scalar(in.grads(), n, 1e-10, s.data());
        shear_rate_avx2(in.grads(), n, 1e-10, v.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(v[i] == doctest::Approx(s[i]).epsilon(1e-14));
        cross_wlf_scalar(in.gamma.data(), in.T.data(), n, p, s.data());
        cross_wlf_avx2(in.gamma.data(), in.T.data(), n, p, v.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(v[i] == doctest::Approx(s[i]).epsilon(1e-12));
    }
}

TEST_CASE("dispatch picks a usable table") {
    const auto& k = active_kernels();
    CHECK(k.shear_rate != nullptr);
    CHECK(k.cross_wlf != nullptr);
    CHECK(std::string(scalar_kernels().name) == "scalar");
    if (!avx2_available()) CHECK(std::string(k.name) == "scalar");
}
