#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "larvasim/errors.hpp"

namespace larvasim {

/// Production setups: a fully closed reactor with climate actuators, a
/// partially closed hall where supply air is conditioned, and an open setup
/// sharing the external environment.
enum class SetupKind { closed, partial, open };

inline std::string to_string(SetupKind k) {
    switch (k) {
        case SetupKind::closed: return "closed";
        case SetupKind::partial: return "partial";
        case SetupKind::open: return "open";
    }
    return "?";
}

inline SetupKind setup_from_string(const std::string& s) {
    if (s == "closed") return SetupKind::closed;
    if (s == "partial") return SetupKind::partial;
    if (s == "open") return SetupKind::open;
    throw ConfigError("unknown setup kind: " + s);
}

/// State vector layout. The closed setup carries all 16 states; the partial
/// and open setups carry the first 8 (medium block) and treat the air as an
/// algebraic function of the disturbances and inputs.
namespace idx {
inline constexpr std::size_t B_dry = 0;   // [g]
inline constexpr std::size_t B_wet = 1;   // [g]
inline constexpr std::size_t T_sigma = 2; // [h]
inline constexpr std::size_t W_med = 3;   // [kg]
inline constexpr std::size_t N_feed = 4;  // [kg]
inline constexpr std::size_t N_exc = 5;   // [kg]
inline constexpr std::size_t B_med = 6;   // [kg]
inline constexpr std::size_t T_med = 7;   // [degC]
inline constexpr std::size_t T_air = 8;   // [degC]
inline constexpr std::size_t H_air = 9;   // [kg/m^3]
inline constexpr std::size_t C_air = 10;  // [kg/m^3]
inline constexpr std::size_t O_air = 11;  // [kg/m^3]
inline constexpr std::size_t T_chm = 12;  // [degC]
inline constexpr std::size_t T_hx = 13;   // [degC]
inline constexpr std::size_t W_chm = 14;  // [kg]
inline constexpr std::size_t W_hx = 15;   // [kg]
}  // namespace idx

inline constexpr std::size_t kClosedStateDim = 16;
inline constexpr std::size_t kMediumStateDim = 8;

inline std::size_t state_dim(SetupKind k) {
    return k == SetupKind::closed ? kClosedStateDim : kMediumStateDim;
}

inline const std::vector<std::string>& state_names_closed() {
    static const std::vector<std::string> names = {
        "B_dry", "B_wet", "T_Sigma", "W_med", "N_feed", "N_exc", "B_med", "T_med",
        "T_air", "H_air", "C_air",   "O_air", "T_chm",  "T_hx",  "W_chm", "W_hx"};
    return names;
}

inline std::vector<std::string> state_names(SetupKind k) {
    const auto& all = state_names_closed();
    return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(state_dim(k))};
}

/// Actuator signals. The closed setup uses the normalized signals (u_T in
/// [-1, 1], all others in [0, 1]); the partial setup uses the physical
/// conditioning quantities u_dT [K], u_dH [kg/m^3], u_W_flow and u_N_flow
/// [kg/s]. Unused fields are ignored by the respective right-hand sides.
struct Inputs {
    // closed-setup normalized signals
    double u_v = 0.0;      // ventilator pump
    double u_d = 0.0;      // door opening
    double u_T = 0.0;      // heater/cooler drive, [-1, 1]
    double u_H = 0.0;      // humidifier
    double u_W_med = 0.0;  // medium water pump
    double u_N = 0.0;      // feeder
    double u_fan = 0.0;    // internal circulation fan (no modeled flux)
    double u_h = 0.0;      // harvesting (handled as discrete events)
    double u_W_sto = 0.0;  // humidifier storage pump (no modeled flux)
    double u_W_ovf = 0.0;  // condensate removal pump (no modeled flux)
    std::array<double, 4> u_I{0.0, 0.0, 0.0, 0.0};  // LED channels

    // partial-setup physical signals
    double u_dT = 0.0;      // supply-air temperature lift [K]
    double u_dH = 0.0;      // supply-air humidity lift [kg/m^3]
    double u_W_flow = 0.0;  // medium water supply [kg/s]
    double u_N_flow = 0.0;  // feed supply [kg/s]
};

/// External conditions.
struct Disturbance {
    double T_out = 20.0;      // [degC]
    double H_out = 0.010;     // [kg/m^3]
    double C_out = 7.3e-4;    // [kg/m^3]
    double O_out = 0.273;     // [kg/m^3]
};

/// Validate actuator ranges for a setup. Throws ConfigError on violations.
inline void validate_inputs(SetupKind kind, const Inputs& u) {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (kind == SetupKind::closed) {
        if (u.u_T < -1.0 || u.u_T > 1.0) throw ConfigError("u_T outside [-1, 1]");
        for (double v : {u.u_v, u.u_d, u.u_H, u.u_W_med, u.u_N, u.u_fan, u.u_h, u.u_W_sto,
                         u.u_W_ovf, u.u_I[0], u.u_I[1], u.u_I[2], u.u_I[3]})
            if (!in01(v)) throw ConfigError("closed-setup signal outside [0, 1]");
    } else {
        if (u.u_W_flow < 0.0 || u.u_N_flow < 0.0)
            throw ConfigError("partial-setup supply rates must be non-negative");
        if (kind == SetupKind::open && (u.u_dT != 0.0 || u.u_dH != 0.0 || u.u_N_flow != 0.0))
            throw ConfigError("open setup admits only the medium water supply input");
    }
}

}  // namespace larvasim
