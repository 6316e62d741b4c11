#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "larvasim/errors.hpp"

namespace larvasim {

/// Model constants. Field names follow the symbol scheme used throughout the
/// docs (k_<quantity>[_<interface>]); every field can be overridden by name
/// through a run configuration, and any field may be freed for estimation.
///
/// Units are SI unless noted. Per-larva biomass is tracked in grams, bulk
/// medium masses in kilograms; flux helpers perform the g <-> kg conversions
/// explicitly.
struct Params {
    // --- larvae ---------------------------------------------------------
    double k_inges = 37.39e-6;        // specific ingestion rate [g/g/s]
    double k_mat = 1.6540e-5;         // specific maturity rate [g/g/s]
    double k_maint = 2.1690e-6;       // specific maintenance rate [g/g/s]
    double k_alpha_excr = 0.25;       // excreted fraction of ingested feed [-]
    double k_alpha_assim = 0.1843;    // fraction spent on digestion [-]
    double k_TSigma1 = 261.0;         // development sum, maturity onset [h]
    double k_TSigma2 = 272.0;         // development sum, assimilation end [h]
    double k_TSigma3 = 286.0;         // development sum, maturity end [h]
    double k_Q_assim = 0.01401e6;     // heat of assimilation respiration [J/g]
    double k_Q_mat = 0.02802e6;       // heat of maturity respiration [J/g]
    double k_Q_maint = 0.02802e6;     // heat of maintenance respiration [J/g]
    double k_Q_bio_rate = 0.0;        // microbiome heat per substrate mass [W/kg]
    double k_W_assim = 2.9;           // water per gram feed assimilated [g/g]
    double k_C_assim = 1.6;           // CO2 per gram assimilated [g/g]
    double k_C_mat = 1.6;             // CO2 per gram, maturity [g/g]
    double k_C_maint = 1.6;           // CO2 per gram, maintenance [g/g]
    double k_C_bio_rate = 0.0;        // microbiome CO2 per wet feed mass [kg/(kg s)]
    double k_bio_C_O = 1.0;           // O2 consumed per CO2 produced [-]

    // --- growth/development response shapes ------------------------------
    double k_rT_min = 15.0;           // temperature response, lower cardinal [degC]
    double k_rT_opt = 36.0;           // temperature response, optimum [degC]
    double k_rT_max = 45.0;           // temperature response, upper cardinal [degC]
    double k_rF_half = 0.4;           // feed response half-saturation [kg]
    double k_rA_half = 1.0;           // air-ratio response half-saturation [-]
    double k_rmaxT = 1.0;             // normalizer for temperature response [-]
    double k_rmaxgm = 1.0;            // normalizer for feed response [-]
    double k_rmaxA = 1.0;             // normalizer for air response [-]
    double k_dev_gain = 2.8;          // development-sum gain at optimum [h/h]

    // --- production unit geometry and transfer ---------------------------
    double k_V_chm = 0.064;           // chamber volume [m^3]
    double k_A_c = 1.117;             // wall surface area [m^2]
    double k_A_m = 0.12;              // growing-medium surface area [m^2]
    double k_A_hx = 0.29;             // heat-exchanger surface area [m^2]
    double k_h_a_c = 26.97;           // air-wall convection [W/(m^2 K)]
    double k_h_a_m = 12.9;            // air-medium convection, plain [W/(m^2 K)]
    double k_h_a_hx = 26.04;          // air-heat-exchanger convection [W/(m^2 K)]
    double k_h_o_c = 8.46;            // wall-outside convection [W/(m^2 K)]
    double k_he_a_m = 11.75;          // air-medium convection, no mass flow [W/(m^2 K)]
    double k_hm_a_m = 1.34;           // evaporation-coupled extra convection [W/(m^2 K) per kg/s]
    double k_A_hx_c = 0.0;            // hx-wall contact area [m^2]
    double k_A_m_c = 0.0;             // medium-wall contact area [m^2]
    double k_U_hx_c = 0.0;            // hx-wall conduction [W/(m^2 K)]
    double k_U_m_c = 0.0;             // medium-wall conduction [W/(m^2 K)]
    double k_c_air = 1006.0;          // specific heat of air [J/(kg K)]
    double k_rho_air = 1.2041;        // density of air [kg/m^3]
    double k_Vdot_u = 2.5e-4;         // ventilation pump rate at full signal [m^3/s]
    double k_Vdot_leak = 5.7870e-7;   // leakage rate [m^3/s]
    double k_Vdot_door = 1.5000e-4;   // door-opening exchange rate [m^3/s]

    // --- thermoelectric heater/cooler ------------------------------------
    double k_alpha_q = 0.0460;        // Seebeck coefficient [V/K]
    double k_Vmax = 12.0;             // maximum drive voltage [V]
    double k_R_q = 1.72;              // series resistance [ohm]
    double k_TEC = 0.4224;            // module thermal conductivity [W/K]

    // --- material properties ---------------------------------------------
    double k_c_water = 4182.0;        // specific heat of water [J/(kg K)]
    double k_h_ew = 2.2564e6;         // latent heat of vaporization [J/kg]
    double k_c_tray = 500.0;          // specific heat of tray [J/(kg K)]
    double k_m_tray = 0.85;           // tray mass [kg]
    double k_c_feed = 19861.0;        // specific heat of dry feed [J/(kg K)]
    double k_c_vap = 4182.0;          // specific heat of water vapor [J/(kg K)]
    double k_c_chm = 1854.0;          // specific heat of chamber parts [J/(kg K)]
    double k_m_chm = 5.0;             // chamber internal mass [kg]
    double k_C_hx_cap = 450.0;        // heat-exchanger heat capacity [J/K]
    double k_R_g = 461.5;             // specific gas constant of vapor [J/(kg K)]

    // --- evaporation, condensation, water handling -----------------------
    double k_G_W = 1.0;               // feed conductivity for water transport [-]
    double k_W_per = 0.6;             // moisture fraction for unhindered evaporation [-]
    double k_W_u = 0.0038;            // medium water pump rate at full signal [kg/s]
    double k_h_med = 1.0e-3;          // medium vapor transport coeff [kg/(m^2 s) per kg/m^3]
    double k_h_chm = 5.0e-4;          // wall vapor transport coeff [same]
    double k_h_hx = 5.0e-4;           // hx vapor transport coeff [same]
    double k_W_hold = 0.01;           // surface film holding capacity [kg]
    double k_runoff = 0.01;           // film drain rate above holding capacity [1/s]
    double k_W_film_eps = 1.0e-5;     // film mass scale gating surface evaporation [kg]

    // --- auxiliary actuators ---------------------------------------------
    double k_H_u = 1.0e-5;            // humidifier vapor rate at full signal [kg/s]
    double k_N_u = 1.0e-4;            // feeder rate at full signal [kg/s]
    double k_heat_1 = 10.0;           // LED channel heat at full signal [W]
    double k_heat_2 = 10.0;
    double k_heat_3 = 10.0;
    double k_heat_4 = 10.0;

    // --- numerical guards --------------------------------------------------
    double k_C_air_floor = 1.0e-6;    // CO2 floor for the O/C air ratio [kg/m^3]
    double k_N_biome_rate = 0.0;      // first-order microbiome feed consumption [1/s]

    double get(const std::string& name) const;
    void set(const std::string& name, double value);
    static bool has(const std::string& name);
};

namespace detail {

inline const std::map<std::string, double Params::*>& param_registry() {
    static const std::map<std::string, double Params::*> reg = {
        {"k_inges", &Params::k_inges},
        {"k_mat", &Params::k_mat},
        {"k_maint", &Params::k_maint},
        {"k_alpha_excr", &Params::k_alpha_excr},
        {"k_alpha_assim", &Params::k_alpha_assim},
        {"k_TSigma1", &Params::k_TSigma1},
        {"k_TSigma2", &Params::k_TSigma2},
        {"k_TSigma3", &Params::k_TSigma3},
        {"k_Q_assim", &Params::k_Q_assim},
        {"k_Q_mat", &Params::k_Q_mat},
        {"k_Q_maint", &Params::k_Q_maint},
        {"k_Q_bio_rate", &Params::k_Q_bio_rate},
        {"k_W_assim", &Params::k_W_assim},
        {"k_C_assim", &Params::k_C_assim},
        {"k_C_mat", &Params::k_C_mat},
        {"k_C_maint", &Params::k_C_maint},
        {"k_C_bio_rate", &Params::k_C_bio_rate},
        {"k_bio_C_O", &Params::k_bio_C_O},
        {"k_rT_min", &Params::k_rT_min},
        {"k_rT_opt", &Params::k_rT_opt},
        {"k_rT_max", &Params::k_rT_max},
        {"k_rF_half", &Params::k_rF_half},
        {"k_rA_half", &Params::k_rA_half},
        {"k_rmaxT", &Params::k_rmaxT},
        {"k_rmaxgm", &Params::k_rmaxgm},
        {"k_rmaxA", &Params::k_rmaxA},
        {"k_dev_gain", &Params::k_dev_gain},
        {"k_V_chm", &Params::k_V_chm},
        {"k_A_c", &Params::k_A_c},
        {"k_A_m", &Params::k_A_m},
        {"k_A_hx", &Params::k_A_hx},
        {"k_h_a_c", &Params::k_h_a_c},
        {"k_h_a_m", &Params::k_h_a_m},
        {"k_h_a_hx", &Params::k_h_a_hx},
        {"k_h_o_c", &Params::k_h_o_c},
        {"k_he_a_m", &Params::k_he_a_m},
        {"k_hm_a_m", &Params::k_hm_a_m},
        {"k_A_hx_c", &Params::k_A_hx_c},
        {"k_A_m_c", &Params::k_A_m_c},
        {"k_U_hx_c", &Params::k_U_hx_c},
        {"k_U_m_c", &Params::k_U_m_c},
        {"k_c_air", &Params::k_c_air},
        {"k_rho_air", &Params::k_rho_air},
        {"k_Vdot_u", &Params::k_Vdot_u},
        {"k_Vdot_leak", &Params::k_Vdot_leak},
        {"k_Vdot_door", &Params::k_Vdot_door},
        {"k_alpha_q", &Params::k_alpha_q},
        {"k_Vmax", &Params::k_Vmax},
        {"k_R_q", &Params::k_R_q},
        {"k_TEC", &Params::k_TEC},
        {"k_c_water", &Params::k_c_water},
        {"k_h_ew", &Params::k_h_ew},
        {"k_c_tray", &Params::k_c_tray},
        {"k_m_tray", &Params::k_m_tray},
        {"k_c_feed", &Params::k_c_feed},
        {"k_c_vap", &Params::k_c_vap},
        {"k_c_chm", &Params::k_c_chm},
        {"k_m_chm", &Params::k_m_chm},
        {"k_C_hx_cap", &Params::k_C_hx_cap},
        {"k_R_g", &Params::k_R_g},
        {"k_G_W", &Params::k_G_W},
        {"k_W_per", &Params::k_W_per},
        {"k_W_u", &Params::k_W_u},
        {"k_h_med", &Params::k_h_med},
        {"k_h_chm", &Params::k_h_chm},
        {"k_h_hx", &Params::k_h_hx},
        {"k_W_hold", &Params::k_W_hold},
        {"k_runoff", &Params::k_runoff},
        {"k_W_film_eps", &Params::k_W_film_eps},
        {"k_H_u", &Params::k_H_u},
        {"k_N_u", &Params::k_N_u},
        {"k_heat_1", &Params::k_heat_1},
        {"k_heat_2", &Params::k_heat_2},
        {"k_heat_3", &Params::k_heat_3},
        {"k_heat_4", &Params::k_heat_4},
        {"k_C_air_floor", &Params::k_C_air_floor},
        {"k_N_biome_rate", &Params::k_N_biome_rate},
    };
    return reg;
}

}  // namespace detail

inline double Params::get(const std::string& name) const {
    const auto& reg = detail::param_registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw ConfigError("unknown parameter: " + name);
    return this->*(it->second);
}

inline void Params::set(const std::string& name, double value) {
    const auto& reg = detail::param_registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw ConfigError("unknown parameter: " + name);
    if (!std::isfinite(value)) throw ConfigError("non-finite value for parameter: " + name);
    this->*(it->second) = value;
}

inline bool Params::has(const std::string& name) {
    return detail::param_registry().count(name) > 0;
}

/// Default estimation bounds for parameters that are commonly freed. Values
/// without a curated entry get a decade around the default (positive
/// parameters only).
inline std::pair<double, double> default_bounds(const std::string& name, const Params& p) {
    static const std::map<std::string, std::pair<double, double>> curated = {
        {"k_inges", {1e-6, 5e-4}},     {"k_mat", {1e-7, 5e-4}},
        {"k_maint", {1e-8, 5e-5}},     {"k_alpha_excr", {0.0, 0.6}},
        {"k_alpha_assim", {0.0, 0.6}}, {"k_Q_assim", {1e3, 1e6}},
        {"k_Q_mat", {1e3, 1e6}},       {"k_Q_maint", {1e3, 1e6}},
        {"k_W_assim", {0.0, 10.0}},    {"k_C_assim", {0.0, 10.0}},
        {"k_C_mat", {0.0, 10.0}},      {"k_C_maint", {0.0, 10.0}},
        {"k_bio_C_O", {0.1, 5.0}},     {"k_he_a_m", {1.0, 60.0}},
        {"k_hm_a_m", {0.0, 10.0}},     {"k_h_a_c", {1.0, 100.0}},
        {"k_h_o_c", {0.5, 50.0}},      {"k_h_med", {1e-5, 1e-1}},
        {"k_h_chm", {1e-5, 1e-1}},     {"k_h_hx", {1e-5, 1e-1}},
        {"k_c_chm", {100.0, 10000.0}}, {"k_c_feed", {500.0, 40000.0}},
    };
    auto it = curated.find(name);
    if (it != curated.end()) return it->second;
    const double v = p.get(name);
    if (v > 0.0) return {v / 10.0, v * 10.0};
    throw ConfigError("no default bounds for parameter " + name + "; specify explicitly");
}

}  // namespace larvasim
