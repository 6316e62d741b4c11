#pragma once

#include <string>
#include <utility>
#include <vector>

#include "larvasim/bio_model.hpp"

namespace larvasim {

/// Every mass and energy flux evaluated at one instant, keyed by the symbol
/// names used throughout the docs. Sign conventions match the balance
/// equations: convective/exchange heat fluxes are positive when they heat
/// the chamber air (or, for phi_Q_c_o, the wall), phi_W_L_* are net
/// evaporation from the surface into the air, and the biological fluxes are
/// positive in their named direction.
struct FluxReport {
    // biological, per larva [g/s]
    double phi_B_ing = 0.0;
    double phi_B_excr = 0.0;
    double phi_B_assim = 0.0;
    double phi_B_eff = 0.0;
    double phi_B_mat = 0.0;
    double phi_B_maint = 0.0;
    double phi_W_assim = 0.0;   // [g/s]
    double phi_W_maint = 0.0;   // [g/s]
    // biological, aggregated
    double phi_Q_bio = 0.0;     // [W]
    double phi_C_bio = 0.0;     // [kg/s]
    double phi_O_bio = 0.0;     // [kg/s]
    double phi_N_ing = 0.0;     // [g/s]
    double phi_N_exc = 0.0;     // [g/s]
    double phi_N_biome = 0.0;   // [g/s]
    // heat [W]
    double phi_Q_LED = 0.0;
    double phi_Q_hx_a = 0.0;
    double phi_Q_exch = 0.0;
    double phi_Q_leak = 0.0;
    double phi_Q_door = 0.0;
    double phi_Q_m_a = 0.0;
    double phi_Q_a_c = 0.0;
    double phi_Q_m_c = 0.0;
    double phi_Q_TEC = 0.0;
    double phi_Q_c_hx = 0.0;
    double phi_Q_c_o = 0.0;
    double phi_Q_L_med = 0.0;
    double phi_Q_L_hx = 0.0;
    double phi_Q_L_chm = 0.0;
    // vapor [kg/s]
    double phi_H_u = 0.0;
    double phi_H_exch = 0.0;
    double phi_H_leak = 0.0;
    double phi_H_door = 0.0;
    double phi_W_L_chm = 0.0;
    double phi_W_L_hx = 0.0;
    double phi_W_L_med = 0.0;
    // liquid water [kg/s]
    double phi_W_u = 0.0;
    double phi_W_bio = 0.0;
    double phi_W_chm_out = 0.0;
    double phi_W_hx_out = 0.0;
    // gases [kg/s]
    double phi_C_exch = 0.0;
    double phi_C_leak = 0.0;
    double phi_O_exch = 0.0;
    double phi_O_leak = 0.0;
    // supply
    double phi_N_u = 0.0;       // [kg/s]
    double phi_Vdot_u = 0.0;    // [m^3/s]

    // process rates (reported alongside the fluxes, not part of the flux key set)
    BioRates rates;

    std::vector<std::pair<std::string, double>> flux_entries() const;
    std::vector<std::pair<std::string, double>> rate_entries() const;
    static const std::vector<std::string>& flux_keys();
    static const std::vector<std::string>& rate_keys();
};

inline std::vector<std::pair<std::string, double>> FluxReport::flux_entries() const {
    return {
        {"phi_B_ing", phi_B_ing},       {"phi_B_excr", phi_B_excr},
        {"phi_B_assim", phi_B_assim},   {"phi_B_eff", phi_B_eff},
        {"phi_B_mat", phi_B_mat},       {"phi_B_maint", phi_B_maint},
        {"phi_W_assim", phi_W_assim},   {"phi_W_maint", phi_W_maint},
        {"phi_Q_bio", phi_Q_bio},       {"phi_C_bio", phi_C_bio},
        {"phi_O_bio", phi_O_bio},       {"phi_N_ing", phi_N_ing},
        {"phi_N_exc", phi_N_exc},       {"phi_N_biome", phi_N_biome},
        {"phi_Q_LED", phi_Q_LED},       {"phi_Q_hx_a", phi_Q_hx_a},
        {"phi_Q_exch", phi_Q_exch},     {"phi_Q_leak", phi_Q_leak},
        {"phi_Q_door", phi_Q_door},     {"phi_Q_m_a", phi_Q_m_a},
        {"phi_Q_a_c", phi_Q_a_c},       {"phi_Q_m_c", phi_Q_m_c},
        {"phi_Q_TEC", phi_Q_TEC},       {"phi_Q_c_hx", phi_Q_c_hx},
        {"phi_Q_c_o", phi_Q_c_o},       {"phi_Q_L_med", phi_Q_L_med},
        {"phi_Q_L_hx", phi_Q_L_hx},     {"phi_Q_L_chm", phi_Q_L_chm},
        {"phi_H_u", phi_H_u},           {"phi_H_exch", phi_H_exch},
        {"phi_H_leak", phi_H_leak},     {"phi_H_door", phi_H_door},
        {"phi_W_L_chm", phi_W_L_chm},   {"phi_W_L_hx", phi_W_L_hx},
        {"phi_W_L_med", phi_W_L_med},   {"phi_W_u", phi_W_u},
        {"phi_W_bio", phi_W_bio},       {"phi_W_chm_out", phi_W_chm_out},
        {"phi_W_hx_out", phi_W_hx_out}, {"phi_C_exch", phi_C_exch},
        {"phi_C_leak", phi_C_leak},     {"phi_O_exch", phi_O_exch},
        {"phi_O_leak", phi_O_leak},     {"phi_N_u", phi_N_u},
        {"phi_Vdot_u", phi_Vdot_u},
    };
}

inline std::vector<std::pair<std::string, double>> FluxReport::rate_entries() const {
    return {
        {"r_assim", rates.r_assim}, {"r_maint", rates.r_maint}, {"r_mat", rates.r_mat},
        {"r_B_mat", rates.r_B_mat}, {"r_T", rates.r_T},         {"r_F_grw", rates.r_Fgrw},
        {"r_A", rates.r_A},
    };
}

inline const std::vector<std::string>& FluxReport::flux_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : FluxReport{}.flux_entries()) k.push_back(name);
        return k;
    }();
    return keys;
}

inline const std::vector<std::string>& FluxReport::rate_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : FluxReport{}.rate_entries()) k.push_back(name);
        return k;
    }();
    return keys;
}

}  // namespace larvasim
