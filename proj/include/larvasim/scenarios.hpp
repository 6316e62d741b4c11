#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "larvasim/ocp.hpp"
#include "larvasim/psychrometrics.hpp"
#include "larvasim/simulate.hpp"

namespace larvasim {

/// Partially closed setup control channels in scenario units:
///   u[0] supply-air temperature lift [K]
///   u[1] supply-air humidity lift [g/m^3]
///   u[2] medium water supply [ug/s]
///   u[3] feed supply [g/h]
/// The weights of the built-in scenarios are stated in these units.
inline Inputs partial_inputs_from_scenario_units(std::span<const double> u) {
    Inputs in;
    in.u_dT = u[0];
    in.u_dH = 1e-3 * u[1];
    in.u_W_flow = 1e-9 * u[2];
    in.u_N_flow = (1e-3 / 3600.0) * u[3];
    return in;
}

/// Wrap the partial-setup reactor dynamics for the OCP layer. The model and
/// disturbance provider must outlive the returned functor.
inline OcpDynamics make_partial_dynamics(const ReactorModel& model,
                                         const DisturbanceProvider& dist) {
    if (model.kind != SetupKind::partial)
        throw ConfigError("ocp dynamics wrapper expects the partial setup");
    return [&model, &dist](double t, std::span<const double> x, std::span<const double> u,
                           std::span<double> dx) {
        model.rhs(t, x, partial_inputs_from_scenario_units(u), dist.at(t), dx);
    };
}

/// Integrated resource use of a partial-setup control schedule.
struct ResourceAccount {
    double heating_energy_J = 0.0;
    double humidification_water_kg = 0.0;
    double substrate_water_kg = 0.0;
    double terminal_B_dry_g = 0.0;
    double terminal_W_med_kg = 0.0;
    double terminal_N_med_kg = 0.0;
};

/// The conditioning energy/water metric: heating energy through the supply
/// air stream at a configured flow, humidification water carried by the same
/// stream, and liquid water pumped into the medium. The identical metric is
/// applied to every controller so only the ratios carry meaning.
inline ResourceAccount account_schedule(const std::vector<std::vector<double>>& u, double dt_s,
                                        const std::vector<double>& x_terminal, const Params& p,
                                        double supply_flow_m3s) {
    ResourceAccount a;
    for (const auto& uk : u) {
        a.heating_energy_J += p.k_c_air * p.k_rho_air * supply_flow_m3s * std::abs(uk[0]) * dt_s;
        a.humidification_water_kg += supply_flow_m3s * std::max(uk[1], 0.0) * 1e-3 * dt_s;
        a.substrate_water_kg += std::max(uk[2], 0.0) * 1e-9 * dt_s;
    }
    a.terminal_B_dry_g = x_terminal[idx::B_dry];
    a.terminal_W_med_kg = x_terminal[idx::W_med];
    a.terminal_N_med_kg = x_terminal[idx::N_feed] + x_terminal[idx::N_exc];
    return a;
}

/// Fixed set-point operation: each control interval conditions the supply
/// air toward the set points regardless of the process state.
struct SetpointSpec {
    double T_set_c = 33.0;
    double H_set_kgm3 = 0.0;        // 0: no humidity target
    double u_w_ugps = 14.0;
    bool humidifier_enabled = true;
};

struct BaselineResult {
    std::vector<std::vector<double>> u;   // N x 4, scenario units
    std::vector<std::vector<double>> x;   // nodes from the same propagator
    ResourceAccount account;
    double objective = 0.0;               // under the scenario's own weights
};

inline BaselineResult setpoint_baseline(const Nlp& nlp, const SetpointSpec& sp,
                                        const DisturbanceProvider& dist, const Params& p,
                                        double supply_flow_m3s) {
    const OcpSpec& spec = nlp.spec;
    BaselineResult out;
    out.u.assign(nlp.N, std::vector<double>(4, 0.0));
    for (int k = 0; k < nlp.N; ++k) {
        const double tk = spec.t0 + k * spec.dt;
        const Disturbance d = dist.at(tk);
        out.u[k][0] = std::clamp(sp.T_set_c - d.T_out, spec.u_lo[0], spec.u_hi[0]);
        out.u[k][1] = sp.humidifier_enabled
                          ? std::clamp((sp.H_set_kgm3 - d.H_out) * 1e3, spec.u_lo[1], spec.u_hi[1])
                          : 0.0;
        out.u[k][2] = std::clamp(sp.u_w_ugps, spec.u_lo[2], spec.u_hi[2]);
        out.u[k][3] = 0.0;
    }
    out.x = rollout(nlp, out.u);
    out.account = account_schedule(out.u, spec.dt, out.x.back(), p, supply_flow_m3s);
    out.objective = nlp.objective(out.x, out.u);
    return out;
}

/// Per-resource consumption ratios of an optimized run against the baseline.
/// A zero baseline resource yields an undefined (NaN) ratio rather than an
/// infinity.
struct ResourceComparison {
    double heating_ratio = 0.0;
    double humidification_ratio = 0.0;
    double substrate_water_ratio = 0.0;
    double biomass_delta = 0.0;  // relative terminal dry-mass change
};

inline ResourceComparison compare_resources(const ResourceAccount& optimal,
                                            const ResourceAccount& baseline) {
    auto ratio = [](double a, double b) {
        return b != 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN();
    };
    ResourceComparison c;
    c.heating_ratio = ratio(optimal.heating_energy_J, baseline.heating_energy_J);
    c.humidification_ratio =
        ratio(optimal.humidification_water_kg, baseline.humidification_water_kg);
    c.substrate_water_ratio = ratio(optimal.substrate_water_kg, baseline.substrate_water_kg);
    c.biomass_delta = baseline.terminal_B_dry_g != 0.0
                          ? (optimal.terminal_B_dry_g - baseline.terminal_B_dry_g) /
                                baseline.terminal_B_dry_g
                          : std::numeric_limits<double>::quiet_NaN();
    return c;
}

/// A built-in optimization scenario: growth-trial initial conditions, a
/// synthetic external climate, Table-of-scenarios weights, and the matching
/// set-point operation.
struct Scenario {
    int id = 1;
    ReactorModel model;
    std::shared_ptr<DisturbanceProvider> disturbance;
    OcpSpec ocp;
    SetpointSpec setpoint;
    double supply_flow_m3s = 2.5e-4;
};

inline std::vector<double> growth_trial_initial_state() {
    std::vector<double> x(kMediumStateDim, 0.0);
    x[idx::B_dry] = 4.28e-3;
    x[idx::B_wet] = 0.018;
    x[idx::W_med] = 1.5;
    x[idx::N_feed] = 0.48;
    x[idx::B_med] = 1.98 + 2000.0 * 1e-3 * 0.018;
    x[idx::T_med] = 27.0;
    return x;
}

/// Smooth synthetic external climate with a daily swing; shift_T lowers the
/// whole temperature trace.
inline std::shared_ptr<DisturbanceProvider> synthetic_climate(double shift_T = 0.0) {
    return std::make_shared<LambdaDisturbance>([shift_T](double t) {
        const double day = 2.0 * M_PI / (24.0 * 3600.0);
        Disturbance d;
        d.T_out = 26.0 + 2.0 * std::sin(day * (t - 6.0 * 3600.0)) + shift_T;
        d.H_out = 0.013 + 0.002 * std::sin(day * (t - 8.0 * 3600.0));
        d.C_out = 7.3e-4;
        d.O_out = 0.273;
        return d;
    });
}

inline Scenario make_scenario(int id, double larvae = 2000.0) {
    if (id < 1 || id > 3) throw ConfigError("scenario id must be 1, 2, or 3");
    Scenario sc;
    sc.id = id;
    sc.model = ReactorModel::make(SetupKind::partial, Params{}, larvae,
                                  ModelOptions{.maturity_smoothing_h = 1.0});
    sc.disturbance = synthetic_climate(id == 2 ? -8.0 : 0.0);

    OcpSpec& o = sc.ocp;
    o.t0 = 0.0;
    o.tf = 192.0 * 3600.0;
    o.dt = 3600.0;
    o.substeps = 1000;
    o.x0 = growth_trial_initial_state();
    const double alpha1 = 10.0, alpha2 = 10.0, alpha3 = 10.0;
    o.terminal_weight.assign(kMediumStateDim, 0.0);
    o.terminal_weight[idx::B_dry] = -alpha1 * 1e3;  // dry mass counted in mg
    o.terminal_weight[idx::W_med] = alpha2;
    o.terminal_weight[idx::N_feed] = alpha3;
    o.terminal_weight[idx::N_exc] = alpha3;
    o.R = {0.01, 0.001, 0.001, 1000.0};
    if (id == 2) o.R[2] = 0.01;  // water to the medium priced 10x the humidification
    o.S = {0.01, 0.01, 0.01, 0.01};
    o.u_lo = {0.0, 0.0, 0.0, 0.0};
    o.u_hi = {15.0, 20.0, 100.0, 0.0};
    if (id == 3) o.u_hi[1] = 0.0;  // humidity actuator faulty/absent
    o.du_lo = {-5.0, -10.0, -50.0, 0.0};
    o.du_hi = {5.0, 10.0, 50.0, 0.0};
    const double inf = std::numeric_limits<double>::infinity();
    o.x_lo = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0};
    o.x_hi = {inf, inf, inf, 3.0, inf, inf, inf, 45.0};
    // u_init left unset: the first interval carries no rate cost or bound, so
    // schedules may start at an arbitrary operating point
    o.x_scale = {0.05, 0.2, 300.0, 1.5, 0.5, 0.3, 2.5, 40.0};
    o.u_scale = {15.0, 20.0, 100.0, 1.0};

    sc.setpoint.T_set_c = 33.0;
    sc.setpoint.H_set_kgm3 = 0.6 * h_sat(33.0);
    sc.setpoint.u_w_ugps = id == 3 ? 28.0 : 14.0;
    sc.setpoint.humidifier_enabled = id != 3;
    return sc;
}

}  // namespace larvasim
