#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "larvasim/bio_model.hpp"
#include "larvasim/flux_report.hpp"
#include "larvasim/parameters.hpp"
#include "larvasim/rate_functions.hpp"
#include "larvasim/state.hpp"
#include "larvasim/thermo_fluxes.hpp"

namespace larvasim {

/// Behavioral switches of the assembled model.
struct ModelOptions {
    double maturity_smoothing_h = 0.0;  // 0 = hard switch
    bool assimilation_taper = false;    // fade assimilation over [k_TSigma1, k_TSigma2]
    bool eps_evap_continuous = false;   // continuity-enforcing evaporation coefficient
    bool tec_kelvin_scale = false;      // absolute temperature in the Seebeck term
};

/// The assembled production-system dynamics. One instance is immutable after
/// construction and its right-hand side is a pure function, so any number of
/// trajectories may be evaluated concurrently.
struct ReactorModel {
    SetupKind kind = SetupKind::closed;
    Params p;
    ModelOptions opt;
    RateFunctions rates;
    double L_num = 0.0;

    static ReactorModel make(SetupKind kind, const Params& params, double larvae,
                             ModelOptions options = {}) {
        ReactorModel m;
        m.kind = kind;
        m.p = params;
        m.opt = options;
        m.rates = RateFunctions::defaults(params);
        m.L_num = larvae;
        return m;
    }

    std::size_t dim() const { return state_dim(kind); }

    void rhs(double t, std::span<const double> x, const Inputs& u, const Disturbance& d,
             std::span<double> dxdt, FluxReport* report = nullptr) const;

    FluxReport flux_report(double t, std::span<const double> x, const Inputs& u,
                           const Disturbance& d) const {
        std::vector<double> dx(dim());
        FluxReport rep;
        rhs(t, x, u, d, dx, &rep);
        return rep;
    }

private:
    /// Medium block shared by all setups: per-larva biology, feed/water
    /// balances, and the medium temperature equation. Fills dxdt[0..7] and
    /// the corresponding report entries. The medium-wall conduction flux is
    /// passed in by the closed setup (zero otherwise).
    void medium_rhs(std::span<const double> x, const AirVolume& air, double phi_W_u,
                    double phi_N_u, double phi_Q_m_c, std::span<double> dxdt,
                    FluxReport& rep) const;
};

inline void ReactorModel::medium_rhs(std::span<const double> x, const AirVolume& air,
                                     double phi_W_u, double phi_N_u, double phi_Q_m_c,
                                     std::span<double> dxdt, FluxReport& rep) const {
    LarvaState larva{x[idx::B_dry], x[idx::B_wet], x[idx::T_sigma]};
    MediumState med;
    med.N_feed = x[idx::N_feed];
    med.N_exc = x[idx::N_exc];
    med.W_med = x[idx::W_med];
    med.T_med = x[idx::T_med];
    med.L_num = L_num;
    med.B_med = x[idx::B_med];

    const double A_air = air.O_air / std::max(air.C_air, p.k_C_air_floor);
    const double W_pct = med.moisture_fraction();

    // Biology. An empty tray has no biological activity.
    BioFluxes bf;
    double dBdry = 0.0, dBwet = 0.0, dTsig = 0.0;
    GasFluxes gas;
    FeedFluxes feed;
    double phi_Q_bio = p.k_Q_bio_rate * med.N_med();
    if (L_num > 0.0) {
        rep.rates = bio_rates(larva, med, A_air, rates, p, opt.maturity_smoothing_h,
                              opt.assimilation_taper);
        dBdry = dry_mass_rhs(larva, rep.rates, p, bf);
        dBwet = wet_mass_rhs(dBdry, bf, W_pct, p);
        dTsig = development_rate(rep.rates, p);
        phi_Q_bio = bio_heat_flux(bf, L_num, med.N_med(), p);
        gas = bio_gas_flux(bf, L_num, med.N_feed, W_pct, p);
        feed = feed_fluxes(bf, L_num);
    }
    const double phi_N_biome = p.k_N_biome_rate * smooth_pos(med.N_feed);  // [kg/s]
    const double phi_W_bio = 1e-3 * L_num * (bf.phi_W_assim - bf.phi_W_maint);

    // Evaporation / condensation on the medium surface.
    Surface med_surf{p.k_A_m, 0.0, p.k_h_med, med.T_med, med.W_med};
    const double eps = eps_evap(W_pct, p, opt.eps_evap_continuous);
    const EvapCondFlux wl_med = evap_cond_flux(med_surf, air.H_air, eps);
    const double phi_W_L_med = wl_med.net();
    const double phi_Q_L_med = latent_heat_flux(med.T_med, phi_W_L_med, p);

    // Convection medium -> air with the mass-transfer correction.
    const double h_am = lewis_corrected_coeff(wl_med.phi_evap, p);
    const double phi_Q_m_a = p.k_A_m * h_am * (med.T_med - air.T_air);

    const HeatCapacities cap = heat_capacities(med.N_feed, med.W_med, air.H_air, 0.0, p);

    dxdt[idx::B_dry] = dBdry;
    dxdt[idx::B_wet] = dBwet;
    dxdt[idx::T_sigma] = dTsig;
    dxdt[idx::W_med] = phi_W_u - phi_W_L_med - phi_W_bio;
    dxdt[idx::N_feed] = phi_N_u - 1e-3 * feed.phi_N_ing - phi_N_biome;
    dxdt[idx::N_exc] = 1e-3 * feed.phi_N_exc;
    dxdt[idx::B_med] = dxdt[idx::W_med] + dxdt[idx::N_feed] + dxdt[idx::N_exc] +
                       1e-3 * L_num * dBwet;
    dxdt[idx::T_med] = (phi_Q_bio - phi_Q_m_a - phi_Q_m_c - phi_Q_L_med) / cap.k_C_med;

    rep.phi_B_ing = bf.phi_B_ing;
    rep.phi_B_excr = bf.phi_B_excr;
    rep.phi_B_assim = bf.phi_B_assim;
    rep.phi_B_eff = bf.phi_B_eff;
    rep.phi_B_mat = bf.phi_B_mat;
    rep.phi_B_maint = bf.phi_B_maint;
    rep.phi_W_assim = bf.phi_W_assim;
    rep.phi_W_maint = bf.phi_W_maint;
    rep.phi_Q_bio = phi_Q_bio;
    rep.phi_C_bio = gas.phi_C_bio;
    rep.phi_O_bio = gas.phi_O_bio;
    rep.phi_N_ing = feed.phi_N_ing;
    rep.phi_N_exc = feed.phi_N_exc;
    rep.phi_N_biome = 1e3 * phi_N_biome;  // reported in g/s
    rep.phi_W_L_med = phi_W_L_med;
    rep.phi_Q_L_med = phi_Q_L_med;
    rep.phi_Q_m_a = phi_Q_m_a;
    rep.phi_Q_m_c = phi_Q_m_c;
    rep.phi_W_u = phi_W_u;
    rep.phi_W_bio = phi_W_bio;
    rep.phi_N_u = phi_N_u;
}

inline void ReactorModel::rhs(double t, std::span<const double> x, const Inputs& u,
                              const Disturbance& d, std::span<double> dxdt,
                              FluxReport* report) const {
    (void)t;
    if (x.size() != dim() || dxdt.size() != dim())
        throw std::invalid_argument("ReactorModel::rhs: state dimension does not match setup");

    FluxReport local;
    FluxReport& rep = report ? *report : local;
    rep = FluxReport{};

    if (kind != SetupKind::closed) {
        // Ambient air is algebraic in the partial/open setups.
        AirVolume air;
        air.volume = p.k_V_chm;
        const double u_dT = kind == SetupKind::open ? 0.0 : u.u_dT;
        const double u_dH = kind == SetupKind::open ? 0.0 : u.u_dH;
        air.T_air = d.T_out + u_dT;
        air.H_air = d.H_out + u_dH;
        air.C_air = d.C_out;
        air.O_air = d.O_out;
        const double phi_N_u = kind == SetupKind::open ? 0.0 : u.u_N_flow;
        medium_rhs(x, air, u.u_W_flow, phi_N_u, 0.0, dxdt, rep);
        return;
    }

    AirVolume air{p.k_V_chm, x[idx::T_air], x[idx::H_air], x[idx::C_air], x[idx::O_air]};
    const double T_chm = x[idx::T_chm];
    const double T_hx = x[idx::T_hx];
    const double W_chm = x[idx::W_chm];
    const double W_hx = x[idx::W_hx];

    // Conduction paths involving the wall (zero contact areas by default).
    const double phi_Q_m_c = conductive_flux(p.k_A_m_c, p.k_U_m_c, x[idx::T_med], T_chm);
    const double phi_Q_c_hx = conductive_flux(p.k_A_hx_c, p.k_U_hx_c, T_chm, T_hx);

    medium_rhs(x, air, water_input_flux(u.u_W_med, p), p.k_N_u * u.u_N, phi_Q_m_c, dxdt, rep);

    // Surface water films on the wall and the heat exchanger.
    Surface chm_surf{p.k_A_c, p.k_h_a_c, p.k_h_chm, T_chm, W_chm};
    Surface hx_surf{p.k_A_hx, p.k_h_a_hx, p.k_h_hx, T_hx, W_hx};
    const EvapCondFlux wl_chm = evap_cond_flux(chm_surf, air.H_air, film_gate(W_chm, p));
    const EvapCondFlux wl_hx = evap_cond_flux(hx_surf, air.H_air, film_gate(W_hx, p));
    const double phi_W_L_chm = wl_chm.net();
    const double phi_W_L_hx = wl_hx.net();
    const double phi_W_chm_out = condensate_runoff(W_chm, p);
    const double phi_W_hx_out = condensate_runoff(W_hx, p);

    // Convective couplings to the chamber air.
    const double phi_Q_a_c = convective_flux(chm_surf, air.T_air);
    const double phi_Q_hx_a = convective_flux(hx_surf, air.T_air);
    const double phi_Q_c_o = p.k_A_c * p.k_h_o_c * (d.T_out - T_chm);

    // Actuator and exchange fluxes.
    const double phi_Q_TEC = tec_heat_flux(u.u_T, air.T_air, d.T_out, p, opt.tec_kelvin_scale);
    const double phi_Q_LED = led_heat_flux(u.u_I.data(), p);
    const double phi_Q_exch = exchange_heat_flux(ExchangeMode::vent, u.u_v, d.T_out, air.T_air, p);
    const double phi_Q_leak = exchange_heat_flux(ExchangeMode::leak, 0.0, d.T_out, air.T_air, p);
    const double phi_Q_door = exchange_heat_flux(ExchangeMode::door, u.u_d, d.T_out, air.T_air, p);
    const double phi_H_exch = vapor_exchange_flux(ExchangeMode::vent, u.u_v, d.H_out, air.H_air, p);
    const double phi_H_leak = vapor_exchange_flux(ExchangeMode::leak, 0.0, d.H_out, air.H_air, p);
    const double phi_H_door = vapor_exchange_flux(ExchangeMode::door, u.u_d, d.H_out, air.H_air, p);
    const double phi_C_exch = gas_exchange_flux(ExchangeMode::vent, u.u_v, d.C_out, air.C_air, p);
    const double phi_C_leak = gas_exchange_flux(ExchangeMode::leak, 0.0, d.C_out, air.C_air, p);
    const double phi_O_exch = gas_exchange_flux(ExchangeMode::vent, u.u_v, d.O_out, air.O_air, p);
    const double phi_O_leak = gas_exchange_flux(ExchangeMode::leak, 0.0, d.O_out, air.O_air, p);
    const double phi_H_u = p.k_H_u * u.u_H;

    // Latent heat on the wall/hx surfaces follows the net vapor flux there.
    const double phi_Q_L_chm = latent_heat_flux(T_chm, phi_W_L_chm, p);
    const double phi_Q_L_hx = latent_heat_flux(T_hx, phi_W_L_hx, p);

    const HeatCapacities cap = heat_capacities(x[idx::N_feed], x[idx::W_med], air.H_air, W_chm, p);

    dxdt[idx::T_air] = (phi_Q_LED + phi_Q_hx_a + phi_Q_exch + phi_Q_leak + phi_Q_door +
                        rep.phi_Q_m_a + phi_Q_a_c) /
                       cap.k_C_air;
    dxdt[idx::H_air] = (phi_H_u + phi_H_exch + phi_H_leak + phi_H_door + rep.phi_W_L_med +
                        phi_W_L_chm + phi_W_L_hx) /
                       p.k_V_chm;
    dxdt[idx::C_air] = (phi_C_exch + phi_C_leak + rep.phi_C_bio) / p.k_V_chm;
    dxdt[idx::O_air] = (phi_O_exch + phi_O_leak - p.k_bio_C_O * rep.phi_C_bio) / p.k_V_chm;
    dxdt[idx::T_chm] =
        (-phi_Q_a_c + phi_Q_c_o - phi_Q_c_hx + phi_Q_m_c - phi_Q_L_chm) / cap.k_C_chm;
    dxdt[idx::T_hx] = (phi_Q_TEC - phi_Q_hx_a + phi_Q_c_hx - phi_Q_L_hx) / p.k_C_hx_cap;
    dxdt[idx::W_chm] = -phi_W_L_chm - phi_W_chm_out;
    dxdt[idx::W_hx] = -phi_W_L_hx - phi_W_hx_out;

    rep.phi_Q_LED = phi_Q_LED;
    rep.phi_Q_hx_a = phi_Q_hx_a;
    rep.phi_Q_exch = phi_Q_exch;
    rep.phi_Q_leak = phi_Q_leak;
    rep.phi_Q_door = phi_Q_door;
    rep.phi_Q_a_c = phi_Q_a_c;
    rep.phi_Q_TEC = phi_Q_TEC;
    rep.phi_Q_c_hx = phi_Q_c_hx;
    rep.phi_Q_c_o = phi_Q_c_o;
    rep.phi_Q_L_hx = phi_Q_L_hx;
    rep.phi_Q_L_chm = phi_Q_L_chm;
    rep.phi_H_u = phi_H_u;
    rep.phi_H_exch = phi_H_exch;
    rep.phi_H_leak = phi_H_leak;
    rep.phi_H_door = phi_H_door;
    rep.phi_W_L_chm = phi_W_L_chm;
    rep.phi_W_L_hx = phi_W_L_hx;
    rep.phi_W_chm_out = phi_W_chm_out;
    rep.phi_W_hx_out = phi_W_hx_out;
    rep.phi_C_exch = phi_C_exch;
    rep.phi_C_leak = phi_C_leak;
    rep.phi_O_exch = phi_O_exch;
    rep.phi_O_leak = phi_O_leak;
    rep.phi_Vdot_u = exchange_rate(ExchangeMode::vent, u.u_v, p);
}

}  // namespace larvasim
