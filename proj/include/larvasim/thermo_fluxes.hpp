#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "larvasim/parameters.hpp"
#include "larvasim/psychrometrics.hpp"
#include "larvasim/rate_functions.hpp"

namespace larvasim {

/// A lumped surface exchanging heat and vapor with the chamber air.
struct Surface {
    double area = 0.0;                  // [m^2]
    double heat_transfer_coeff = 0.0;   // [W/(m^2 K)]
    double vapor_transport_coeff = 0.0; // [kg/(m^2 s) per kg/m^3]
    double temperature = 0.0;           // [degC]
    double water_film = 0.0;            // [kg]
};

/// Chamber air as a lumped volume.
struct AirVolume {
    double volume = 0.0;  // [m^3]
    double T_air = 0.0;   // [degC]
    double H_air = 0.0;   // absolute humidity [kg/m^3]
    double C_air = 0.0;   // CO2 [kg/m^3]
    double O_air = 0.0;   // O2 [kg/m^3]
};

enum class ExchangeMode { vent, leak, door };

/// Convective heat flux surface -> air [W]; positive heats the air.
inline double convective_flux(const Surface& surf, double T_air) {
    return surf.area * surf.heat_transfer_coeff * (surf.temperature - T_air);
}

/// Convection coefficient for the medium surface with the mass-transfer
/// correction: the effective coefficient grows in proportion to the
/// simultaneous evaporation flux.
inline double lewis_corrected_coeff(double phi_W_evap, const Params& p) {
    return p.k_he_a_m + p.k_hm_a_m * phi_W_evap;
}

/// Conductive heat flux a -> b through a contact area [W].
inline double conductive_flux(double contact_area, double U, double T_a, double T_b) {
    return contact_area * U * (T_a - T_b);
}

/// Volumetric air-exchange rate for a mode [m^3/s].
inline double exchange_rate(ExchangeMode mode, double u, const Params& p) {
    switch (mode) {
        case ExchangeMode::vent: return p.k_Vdot_u * u;
        case ExchangeMode::leak: return p.k_Vdot_leak;
        case ExchangeMode::door: return p.k_Vdot_door * u;
    }
    return 0.0;
}

/// Heat carried by air exchange with the outside [W]; sign follows
/// (T_out - T_air).
inline double exchange_heat_flux(ExchangeMode mode, double u, double T_out, double T_air,
                                 const Params& p) {
    return p.k_c_air * p.k_rho_air * exchange_rate(mode, u, p) * (T_out - T_air);
}

/// Water vapor carried by air exchange [kg/s]; sign follows (H_out - H_air).
inline double vapor_exchange_flux(ExchangeMode mode, double u, double H_out, double H_air,
                                  const Params& p) {
    return exchange_rate(mode, u, p) * (H_out - H_air);
}

/// Gas (CO2 or O2) carried by air exchange [kg/s]; sign follows the
/// concentration difference.
inline double gas_exchange_flux(ExchangeMode mode, double u, double X_out, double X_air,
                                const Params& p) {
    return exchange_rate(mode, u, p) * (X_out - X_air);
}

/// Thermoelectric module heat flux into the heat exchanger [W]: Seebeck
/// pumping, Joule heating, and conduction across the module. The Seebeck term
/// uses the air temperature on the configured scale (the identified
/// parameters assume the Celsius reading; set kelvin_scale for the absolute
/// form).
inline double tec_heat_flux(double u_T, double T_air, double T_out, const Params& p,
                            bool kelvin_scale = false) {
    const double t_seebeck = kelvin_scale ? T_air + 273.15 : T_air;
    return (p.k_alpha_q * u_T * p.k_Vmax / p.k_R_q) * t_seebeck +
           (u_T * p.k_Vmax * p.k_Vmax) / (2.0 * p.k_R_q) + p.k_TEC * (T_out - T_air);
}

/// Heat dissipated by the LED channels [W].
inline double led_heat_flux(const double u_I[4], const Params& p) {
    return p.k_heat_1 * u_I[0] + p.k_heat_2 * u_I[1] + p.k_heat_3 * u_I[2] + p.k_heat_4 * u_I[3];
}

/// Evaporation coefficient of the growing medium as a function of its
/// moisture fraction. The printed piecewise law jumps at k_W_per unless the
/// continuity option rescales the conductivity to 1/k_W_per.
inline double eps_evap(double W_med_pct, const Params& p, bool continuous = false) {
    if (W_med_pct > p.k_W_per) return 1.0;
    const double gain = continuous ? 1.0 / p.k_W_per : p.k_G_W;
    return gain * W_med_pct;
}

struct EvapCondFlux {
    double phi_evap = 0.0;  // [kg/s], >= 0
    double phi_cond = 0.0;  // [kg/s], >= 0
    double net() const { return phi_evap - phi_cond; }
};

/// Evaporation/condensation at a surface, split into one-signed components;
/// at most one is nonzero. The evaporation coefficient gates only the
/// evaporation side.
inline EvapCondFlux evap_cond_flux(const Surface& surf, double H_air, double eps) {
    EvapCondFlux f;
    const double dh = h_sat(surf.temperature) - H_air;
    const double ah = surf.area * surf.vapor_transport_coeff;
    if (dh > 0.0)
        f.phi_evap = ah * eps * dh;
    else
        f.phi_cond = ah * (-dh);
    return f;
}

/// Availability gate for evaporation from a thin water film: vanishes
/// smoothly as the film empties so films cannot be driven negative.
inline double film_gate(double water_film, const Params& p) {
    const double w = smooth_pos(water_film);
    return w / (w + p.k_W_film_eps);
}

/// Latent heat carried by a net evaporation flux from a surface at T_surf
/// [W]: heat to raise the water to 100 degC plus the heat of vaporization.
/// Positive net evaporation removes heat from the surface.
inline double latent_heat_flux(double T_surf, double phi_W_net, const Params& p) {
    return (p.k_c_water * (100.0 - T_surf) + p.k_h_ew) * phi_W_net;
}

struct HeatCapacities {
    double k_C_med = 0.0;  // growing medium [J/K]
    double k_C_air = 0.0;  // chamber air [J/K]
    double k_C_chm = 0.0;  // chamber walls and internals [J/K]
};

/// State-dependent lumped heat capacities. Throws std::domain_error when a
/// capacity is not positive (the temperature equations divide by them).
inline HeatCapacities heat_capacities(double N_feed, double W_med, double H_air, double W_chm,
                                      const Params& p) {
    HeatCapacities c;
    c.k_C_med = p.k_c_tray * p.k_m_tray + p.k_c_feed * std::max(N_feed, 0.0) +
                p.k_c_water * std::max(W_med, 0.0);
    c.k_C_air = p.k_c_air * p.k_rho_air * p.k_V_chm + p.k_c_vap * p.k_V_chm * std::max(H_air, 0.0);
    c.k_C_chm = p.k_c_chm * p.k_m_chm + p.k_c_water * std::max(W_chm, 0.0);
    if (c.k_C_med <= 0.0 || c.k_C_air <= 0.0 || c.k_C_chm <= 0.0)
        throw std::domain_error("heat_capacities: non-positive heat capacity (degenerate state)");
    return c;
}

inline HeatCapacities heat_capacities(double N_feed, double W_med, const AirVolume& air,
                                      double W_chm, const Params& p) {
    return heat_capacities(N_feed, W_med, air.H_air, W_chm, p);
}

/// Water supplied to the growing medium by the pump [kg/s].
inline double water_input_flux(double u_W_med, const Params& p) { return p.k_W_u * u_W_med; }

/// Condensate runoff from a surface film [kg/s]: first-order drain of the
/// film mass above its holding capacity.
inline double condensate_runoff(double water_film, const Params& p) {
    return p.k_runoff * std::max(water_film - p.k_W_hold, 0.0);
}

}  // namespace larvasim
