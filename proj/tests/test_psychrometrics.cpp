#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "larvasim/psychrometrics.hpp"

using namespace larvasim;

namespace {

// Independent route: Magnus saturation pressure in kPa converted by the
// ideal-gas law, written out with no shared code path.
double h_sat_oracle(double t) {
    const double p_kpa = 0.61094 * std::exp(17.625 * t / (t + 243.03));
    return p_kpa * 1000.0 / (461.5 * (t + 273.15));
}

}  // namespace

TEST_CASE("saturation vapor density matches the ideal-gas oracle") {
    for (double t = -30.0; t <= 60.0; t += 2.5) {
        CHECK(h_sat(t) == Catch::Approx(h_sat_oracle(t)).epsilon(1e-12));
    }
    CHECK(h_sat(25.0) == Catch::Approx(0.0230).epsilon(0.01));
    CHECK(h_sat(0.0) == Catch::Approx(0.00485).epsilon(0.01));
}

TEST_CASE("saturation vapor density is strictly increasing") {
    CHECK(h_sat(30.0) > h_sat(25.0));
    CHECK(h_sat(25.0) > h_sat(20.0));
    double prev = h_sat(-39.0);
    for (double t = -38.0; t <= 60.0; t += 1.0) {
        const double cur = h_sat(t);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("saturation vapor density rejects temperatures below validity") {
    CHECK_THROWS_AS(h_sat(-45.0), std::domain_error);
    CHECK_THROWS_AS(h_sat(-40.0), std::domain_error);
}

TEST_CASE("saturation vapor density tracks published table values within 1%") {
    // saturation vapor density over liquid water [g/m^3]
    const std::pair<double, double> table[] = {
        {0.0, 4.85},  {5.0, 6.80},  {10.0, 9.40},  {15.0, 12.83}, {20.0, 17.30},
        {25.0, 23.05}, {30.0, 30.38}, {35.0, 39.63}, {40.0, 51.19}, {45.0, 65.50},
        {50.0, 83.06},
    };
    for (const auto& [t, rho_g] : table) {
        CHECK(h_sat(t) * 1000.0 == Catch::Approx(rho_g).epsilon(0.01));
    }
}
