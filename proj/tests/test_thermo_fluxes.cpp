#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "larvasim/psychrometrics.hpp"
#include "larvasim/thermo_fluxes.hpp"

using namespace larvasim;

TEST_CASE("convective flux follows the temperature difference") {
    Params p;
    Surface wall{p.k_A_c, p.k_h_a_c, 0.0, 25.0, 0.0};
    CHECK(convective_flux(wall, 25.0) == 0.0);
    wall.temperature = 26.0;
    CHECK(convective_flux(wall, 25.0) == Catch::Approx(30.13).epsilon(1e-3));
    CHECK(lewis_corrected_coeff(0.0, p) == Catch::Approx(p.k_he_a_m));
    CHECK(lewis_corrected_coeff(1e-3, p) == Catch::Approx(11.75 + 1.34e-3).epsilon(1e-12));
}

TEST_CASE("conductive flux is antisymmetric and zero by default") {
    Params p;
    CHECK(conductive_flux(p.k_A_hx_c, p.k_U_hx_c, 40.0, 20.0) == 0.0);
    CHECK(conductive_flux(0.5, 2.0, 30.0, 30.0) == 0.0);
    CHECK(conductive_flux(0.5, 2.0, 31.0, 29.0) ==
          Catch::Approx(-conductive_flux(0.5, 2.0, 29.0, 31.0)));
}

TEST_CASE("exchange heat flux per mode") {
    Params p;
    for (auto mode : {ExchangeMode::vent, ExchangeMode::leak, ExchangeMode::door})
        CHECK(exchange_heat_flux(mode, 1.0, 22.0, 22.0, p) == 0.0);
    CHECK(exchange_heat_flux(ExchangeMode::vent, 1.0, 20.0, 25.0, p) ==
          Catch::Approx(-1.514).epsilon(1e-3));
    const double leak = exchange_heat_flux(ExchangeMode::leak, 0.0, 20.0, 25.0, p);
    const double vent = exchange_heat_flux(ExchangeMode::vent, 1.0, 20.0, 25.0, p);
    CHECK(leak / vent == Catch::Approx(5.787e-7 / 2.5e-4).epsilon(1e-9));
}

TEST_CASE("thermoelectric heat flux reproduces hand evaluations") {
    Params p;
    CHECK(tec_heat_flux(0.0, 25.0, 25.0, p) == 0.0);
    CHECK(tec_heat_flux(0.0, 25.0, 20.0, p) == Catch::Approx(-2.112).epsilon(1e-6));
    CHECK(tec_heat_flux(1.0, 25.0, 25.0, p) == Catch::Approx(49.9).epsilon(1e-3));
    // kelvin option shifts only the Seebeck term
    const double dc = tec_heat_flux(1.0, 25.0, 25.0, p, false);
    const double dk = tec_heat_flux(1.0, 25.0, 25.0, p, true);
    CHECK(dk - dc == Catch::Approx((p.k_alpha_q * p.k_Vmax / p.k_R_q) * 273.15).epsilon(1e-9));
}

TEST_CASE("LED heat is the weighted channel sum") {
    Params p;
    double off[4] = {0, 0, 0, 0};
    CHECK(led_heat_flux(off, p) == 0.0);
    double one[4] = {0.5, 0, 0, 0};
    CHECK(led_heat_flux(one, p) == Catch::Approx(5.0));
    double all[4] = {0.3, 0.2, 0.6, 0.1};
    double twice[4] = {0.6, 0.4, 1.2, 0.2};
    CHECK(led_heat_flux(twice, p) == Catch::Approx(2.0 * led_heat_flux(all, p)));
}

TEST_CASE("evaporation and condensation are mutually exclusive") {
    Surface s{0.12, 0.0, 0.01, 30.0, 1.0};
    const double hs = h_sat(30.0);
    SECTION("equilibrium") {
        auto f = evap_cond_flux(s, hs, 1.0);
        CHECK(f.phi_evap == 0.0);
        CHECK(f.phi_cond == 0.0);
        CHECK(f.net() == 0.0);
    }
    SECTION("supersaturated air condenses regardless of the coefficient") {
        auto f = evap_cond_flux(s, hs + 0.005, 0.0);
        CHECK(f.phi_evap == 0.0);
        CHECK(f.phi_cond > 0.0);
    }
    SECTION("hand-evaluated evaporation") {
        auto f = evap_cond_flux(s, hs - 0.01, 1.0);
        CHECK(f.phi_evap == Catch::Approx(1.2e-5).epsilon(1e-9));
        CHECK(f.phi_cond == 0.0);
    }
    SECTION("exclusivity over a sweep") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> uh(0.0, 0.08), ue(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            auto f = evap_cond_flux(s, uh(rng), ue(rng));
            CHECK(f.phi_evap * f.phi_cond == 0.0);
        }
    }
}

TEST_CASE("evaporation coefficient branches on the moisture fraction") {
    Params p;
    CHECK(eps_evap(0.7, p) == 1.0);
    CHECK(eps_evap(0.3, p) == Catch::Approx(0.3));
    CHECK(eps_evap(0.6, p) == Catch::Approx(0.6));  // boundary takes the lower branch
    SECTION("continuity option rescales the slope") {
        Params p2 = p;
        p2.k_G_W = 0.5;
        CHECK(eps_evap(0.59999, p2, true) == Catch::Approx(0.59999 / 0.6).epsilon(1e-9));
    }
}

TEST_CASE("latent heat follows the net water flux") {
    Params p;
    CHECK(latent_heat_flux(30.0, 0.0, p) == 0.0);
    CHECK(latent_heat_flux(30.0, 4.4e-6, p) == Catch::Approx(11.2).epsilon(2e-3));
    CHECK(latent_heat_flux(30.0, 2.0 * 4.4e-6, p) ==
          Catch::Approx(2.0 * latent_heat_flux(30.0, 4.4e-6, p)));
}

TEST_CASE("state-dependent heat capacities") {
    Params p;
    auto dry = heat_capacities(0.0, 0.0, 0.0, 0.0, p);
    auto wet = heat_capacities(0.0, 1.0, 0.0, 0.0, p);
    CHECK(wet.k_C_med - dry.k_C_med == Catch::Approx(4182.0).epsilon(1e-6));
    CHECK(dry.k_C_air == Catch::Approx(77.5).epsilon(1e-3));
    CHECK(heat_capacities(0.0, 2.0, 0.0, 0.0, p).k_C_med > wet.k_C_med);
    SECTION("degenerate capacity raises") {
        Params bad = p;
        bad.k_c_tray = 0.0;
        bad.k_m_tray = 0.0;
        CHECK_THROWS_AS(heat_capacities(0.0, 0.0, 0.0, 0.0, bad), std::domain_error);
    }
}

TEST_CASE("vapor and gas exchange follow the driving difference") {
    Params p;
    CHECK(vapor_exchange_flux(ExchangeMode::vent, 1.0, 0.01, 0.01, p) == 0.0);
    CHECK(vapor_exchange_flux(ExchangeMode::vent, 1.0, 0.015, 0.01, p) ==
          Catch::Approx(1.25e-6).epsilon(1e-9));
    CHECK(gas_exchange_flux(ExchangeMode::vent, 1.0, 0.0007, 0.0007, p) == 0.0);
    CHECK(gas_exchange_flux(ExchangeMode::vent, 1.0, 0.0, 0.02, p) ==
          Catch::Approx(-5e-6).epsilon(1e-9));
    // sign coherence across modes
    for (auto mode : {ExchangeMode::vent, ExchangeMode::leak, ExchangeMode::door}) {
        CHECK(vapor_exchange_flux(mode, 0.7, 0.02, 0.01, p) >= 0.0);
        CHECK(gas_exchange_flux(mode, 0.7, 0.01, 0.02, p) <= 0.0);
    }
}

TEST_CASE("water input is proportional to the pump signal") {
    Params p;
    CHECK(water_input_flux(0.0, p) == 0.0);
    CHECK(water_input_flux(1.0, p) == Catch::Approx(0.0038));
    CHECK(water_input_flux(0.5, p) == Catch::Approx(0.0019));
}

TEST_CASE("condensate runoff drains the film above its holding capacity") {
    Params p;
    CHECK(condensate_runoff(0.005, p) == 0.0);
    CHECK(condensate_runoff(p.k_W_hold, p) == 0.0);
    Params fast = p;
    fast.k_runoff = 0.1;
    CHECK(condensate_runoff(fast.k_W_hold + 0.01, fast) == Catch::Approx(1e-3).epsilon(1e-9));
    SECTION("steady state balances a constant condensation inflow") {
        const double inflow = 2.5e-4;
        const double w_star = p.k_W_hold + inflow / p.k_runoff;
        CHECK(condensate_runoff(w_star, p) == Catch::Approx(inflow).epsilon(1e-12));
    }
}
