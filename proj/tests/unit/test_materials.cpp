#include <doctest.h>

#include "../oracles/oracles.hpp"
#include "nozzle/errors.hpp"
#include "nozzle/materials.hpp"

#include <cmath>

using namespace nozzle;

TEST_CASE("cross-WLF zero-shear values") {
    const CrossWlfParams p;
    CHECK(cross_viscosity(0.0, 373.0, p) == 3.317e9);
    CHECK(zero_shear_viscosity(373.0, p) == 3.317e9);
    // Hand evaluation of the WLF shift at 503 K.
    const double expected = 3.317e9 * std::exp(-20.19 * 130.0 / (51.6 + 130.0));
    CHECK(cross_viscosity(0.0, 503.0, p) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("cross-WLF shear thinning and temperature dependence") {
    const CrossWlfParams p;
    for (double T : {380.0, 450.0, 503.0}) {
        double prev = cross_viscosity(0.0, T, p);
        for (int i = 0; i < 100; ++i) {
            const double g = std::pow(10.0, -3.0 + 8.0 * i / 99.0);
            const double eta = cross_viscosity(g, T, p);
            CHECK(eta > 0.0);
            CHECK(eta <= prev);
            // Finite-difference slope is non-positive.
            const double d = (cross_viscosity(g * 1.001, T, p) - eta) / (0.001 * g);
            CHECK(d <= 0.0);
            prev = eta;
        }
    }
    CHECK(cross_viscosity(1e12, 503.0, p) < 1e-3 * cross_viscosity(0.0, 503.0, p));
    double prev = zero_shear_viscosity(373.0, p);
    for (double T = 380.0; T < 600.0; T += 10.0) {
        const double eta0 = zero_shear_viscosity(T, p);
        CHECK(eta0 < prev);
        prev = eta0;
    }
}

TEST_CASE("cross-WLF domain errors") {
    const CrossWlfParams p;
    CHECK_THROWS_AS(cross_viscosity(1.0, p.wlf_pole(), p), DomainError);
    CHECK_THROWS_AS(cross_viscosity(1.0, 300.0, p), DomainError);
    CHECK_THROWS_AS(cross_viscosity(-1.0, 400.0, p), DomainError);
    CHECK_NOTHROW(cross_viscosity(1.0, p.wlf_pole() + 1.0, p));
    CrossWlfParams bad;
    bad.n = 1.5;
    bad.kappa = 0.0;
    CHECK(bad.violations().size() == 2);
}

TEST_CASE("giesekus parameters split the total viscosity") {
    GiesekusParams p;
    CHECK(p.eta_s() + p.eta_p() == doctest::Approx(p.eta_total).epsilon(1e-15));
    CHECK(p.eta_s() / p.eta_p() == doctest::Approx(p.beta));
    CHECK(p.violations().empty());
    p.alpha_G = 0.7;
    p.lambda = -1.0;
    CHECK(p.violations().size() == 2);
}

TEST_CASE("giesekus steady shear limits") {
    GiesekusParams p;
    const auto z = giesekus_steady_shear(0.0, p);
    CHECK(z.xx == 0.0);
    CHECK(z.xy == 0.0);
    CHECK(z.yy == 0.0);
    p.lambda = 0.0;
    const auto n = giesekus_steady_shear(7.0, p);
    CHECK(n.xy == doctest::Approx(p.eta_p() * 7.0).epsilon(1e-14));
    CHECK(n.xx == 0.0);
    CHECK(n.yy == 0.0);
}

TEST_CASE("giesekus steady shear against closed form and time integration") {
    const GiesekusParams p;
    for (double g : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        CAPTURE(g);
        const auto s = giesekus_steady_shear(g, p);
        const auto c = oracle::giesekus_shear_closed_form(g, p.lambda, p.alpha_G, p.eta_p());
        CHECK(s.xx == doctest::Approx(c.xx).epsilon(1e-9));
        CHECK(s.xy == doctest::Approx(c.xy).epsilon(1e-9));
        CHECK(s.yy == doctest::Approx(c.yy).epsilon(1e-9));
        CHECK(s.xx - s.yy >= 0.0);
        const auto r = giesekus_shear_residual(s, g, p);
        for (double x : r) CHECK(std::abs(x) <= 1e-9 * (1.0 + std::abs(s.xx)));
    }
    // Two independent routes at the reference shear rate.
    const auto s = giesekus_steady_shear(10.0, p);
    const auto ode = oracle::giesekus_shear_ode(10.0, p.lambda, p.alpha_G, p.eta_p());
    CHECK(s.xx == doctest::Approx(ode.xx).epsilon(1e-6));
    CHECK(s.xy == doctest::Approx(ode.xy).epsilon(1e-6));
    CHECK(s.yy == doctest::Approx(ode.yy).epsilon(1e-6));
    CHECK(s.xy == doctest::Approx(1.266476e4).epsilon(1e-6));
}

TEST_CASE("weissenberg number") {
    GiesekusParams p;
    CHECK(weissenberg_number(p, 10.0, 0.25) == doctest::Approx(8.0));
    CHECK(weissenberg_number(p, 20.0, 0.25) == doctest::Approx(16.0));
    p.lambda = 0.0;
    CHECK(weissenberg_number(p, 10.0, 0.25) == 0.0);
}
