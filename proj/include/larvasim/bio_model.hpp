#pragma once

#include <cmath>
#include <stdexcept>

#include "larvasim/parameters.hpp"
#include "larvasim/rate_functions.hpp"

namespace larvasim {

/// Per-larva biomass state. Dry and wet mass in grams, development sums in
/// effective hours.
struct LarvaState {
    double B_dry = 0.0;    // dry mass per larva [g]
    double B_wet = 0.0;    // wet mass per larva [g]
    double T_sigma = 0.0;  // development sums [h]
};

/// Growing-medium bulk state (masses in kg, temperature in degC).
struct MediumState {
    double N_feed = 0.0;  // unused feed dry mass [kg]
    double N_exc = 0.0;   // excreta dry mass [kg]
    double W_med = 0.0;   // water in medium [kg]
    double T_med = 0.0;   // medium temperature [degC]
    double L_num = 0.0;   // larvae count [-]
    double B_med = 0.0;   // total medium mass incl. larvae [kg]

    double N_med() const { return N_feed + N_exc; }
    double B_tot(double B_dry_per_larva) const { return L_num * B_dry_per_larva; }

    /// Substrate moisture concentration W_med / (W_med + N_feed), clamped
    /// smoothly into [0, 1] near depleted resources.
    double moisture_fraction() const {
        const double w = smooth_pos(W_med);
        const double n = smooth_pos(N_feed);
        const double denom = w + n;
        if (denom <= 0.0) return 0.0;
        const double f = w / denom;
        return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
    }
};

/// Normalized process rates and their raw components.
struct BioRates {
    double r_assim = 0.0;  // assimilation rate [0,1]
    double r_maint = 0.0;  // maintenance rate [0,1]
    double r_mat = 0.0;    // maturity rate [0,1]
    double r_B_mat = 0.0;  // maturity activation {0,1} (or smoothed)
    double r_T = 0.0;      // raw temperature response
    double r_Fgrw = 0.0;   // raw feed response
    double r_A = 0.0;      // raw air response
};

/// Per-larva biomass fluxes [g/s] plus the water split of the wet-mass
/// balance. Population aggregation happens only in the flux operations that
/// take a larvae count.
struct BioFluxes {
    double phi_B_ing = 0.0;    // feed ingested
    double phi_B_excr = 0.0;   // non-digested feed returned
    double phi_B_assim = 0.0;  // feed spent on digestion
    double phi_B_eff = 0.0;    // effective assimilates for growth
    double phi_B_maint = 0.0;  // maintenance expense
    double phi_B_mat = 0.0;    // maturity expense
    double phi_W_assim = 0.0;  // water drawn from medium [g/s]
    double phi_W_maint = 0.0;  // water spent in maintenance [g/s]
};

/// Assemble the normalized process rates at the current state.
/// Throws std::domain_error when a normalizer is zero.
inline BioRates bio_rates(const LarvaState& larva, const MediumState& med, double A_air,
                          const RateFunctions& rf, const Params& p,
                          double maturity_smoothing_h = 0.0, bool taper = false) {
    if (p.k_rmaxT == 0.0 || p.k_rmaxgm == 0.0 || p.k_rmaxA == 0.0)
        throw std::domain_error("bio_rates: zero rate normalizer");
    BioRates r;
    r.r_T = rf.temperature(med.T_med);
    r.r_Fgrw = rf.feed(med.N_feed);
    r.r_A = rf.air(A_air);
    const double product = (r.r_T / p.k_rmaxT) * (r.r_Fgrw / p.k_rmaxgm) * (r.r_A / p.k_rmaxA);
    r.r_maint = product;
    r.r_B_mat = maturity_activation(larva.T_sigma, p, maturity_smoothing_h);
    r.r_mat = r.r_B_mat * product;
    r.r_assim = product;
    if (taper) r.r_assim *= assimilation_taper(larva.T_sigma, p);
    return r;
}

/// Development-sum growth rate [h/s]: the normalized temperature response
/// scaled by the development gain.
inline double development_rate(const BioRates& r, const Params& p) {
    return p.k_dev_gain * (r.r_T / p.k_rmaxT) / 3600.0;
}

/// Dry-mass balance of one larva. Returns dB_dry/dt [g/s] and fills the
/// biomass flux components.
inline double dry_mass_rhs(const LarvaState& larva, const BioRates& r, const Params& p,
                           BioFluxes& f) {
    const double b = larva.B_dry;  // non-negative by the dry-mass dynamics
    const double eps_inges = 1.0 - p.k_alpha_excr - p.k_alpha_assim;
    f.phi_B_ing = r.r_assim * p.k_inges * b;
    f.phi_B_excr = p.k_alpha_excr * f.phi_B_ing;
    f.phi_B_assim = p.k_alpha_assim * f.phi_B_ing;
    f.phi_B_eff = eps_inges * f.phi_B_ing;
    f.phi_B_maint = r.r_maint * p.k_maint * b;
    f.phi_B_mat = r.r_mat * p.k_mat * b;
    return f.phi_B_eff - f.phi_B_maint - f.phi_B_mat;
}

/// Wet-mass balance of one larva [g/s]: dry-mass change plus the net water
/// assimilated from the medium. Also fills the water flux split.
inline double wet_mass_rhs(double dBdry_dt, BioFluxes& f, double W_med_pct, const Params& p) {
    f.phi_W_assim = f.phi_B_assim * p.k_W_assim * W_med_pct;
    f.phi_W_maint = f.phi_B_maint * p.k_W_assim;
    return dBdry_dt + f.phi_W_assim - f.phi_W_maint;
}

/// Heat produced in the growing medium by larvae and microbiome [W].
inline double bio_heat_flux(const BioFluxes& f, double L_num, double N_med, const Params& p) {
    return L_num * (p.k_Q_assim * f.phi_B_assim + p.k_Q_maint * f.phi_B_maint +
                    p.k_Q_mat * f.phi_B_mat) +
           p.k_Q_bio_rate * N_med;
}

struct GasFluxes {
    double phi_C_bio = 0.0;  // CO2 production [kg/s]
    double phi_O_bio = 0.0;  // O2 consumption [kg/s]
};

/// Metabolic CO2 production and the coupled O2 consumption [kg/s]. The
/// per-larva biomass fluxes are in g/s, hence the 1e-3.
inline GasFluxes bio_gas_flux(const BioFluxes& f, double L_num, double N_feed, double W_med_pct,
                              const Params& p) {
    GasFluxes g;
    g.phi_C_bio = 1e-3 * L_num *
                      (p.k_C_assim * f.phi_B_assim + p.k_C_maint * f.phi_B_maint +
                       p.k_C_mat * f.phi_B_mat) +
                  p.k_C_bio_rate * smooth_pos(N_feed) * W_med_pct;
    g.phi_O_bio = p.k_bio_C_O * g.phi_C_bio;
    return g;
}

struct FeedFluxes {
    double phi_N_ing = 0.0;  // total feed ingested [g/s]
    double phi_N_exc = 0.0;  // total feed excreted back [g/s]
};

/// Population-level feed ingestion and excretion [g/s].
inline FeedFluxes feed_fluxes(const BioFluxes& f, double L_num) {
    FeedFluxes n;
    n.phi_N_ing = L_num * f.phi_B_ing;
    n.phi_N_exc = L_num * f.phi_B_excr;
    return n;
}

}  // namespace larvasim
