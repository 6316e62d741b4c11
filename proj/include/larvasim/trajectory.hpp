#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "larvasim/errors.hpp"
#include "larvasim/flux_report.hpp"
#include "larvasim/state.hpp"

namespace larvasim {

/// A recorded run: states, applied inputs, disturbances, and (optionally)
/// the flux report, sampled on a strictly increasing time grid.
struct Trajectory {
    SetupKind kind = SetupKind::closed;
    std::vector<std::string> names;       // state channel names
    std::vector<double> t;                // [s]
    std::vector<std::vector<double>> x;   // per sample
    std::vector<Inputs> u;
    std::vector<Disturbance> d;
    std::vector<double> larvae;           // larvae count per sample
    std::vector<FluxReport> fluxes;       // empty unless recorded
    std::vector<std::string> warnings;

    std::size_t size() const { return t.size(); }

    std::size_t channel_index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw ConfigError("trajectory has no state channel '" + name + "'");
    }

    /// Linear interpolation of one state channel at an arbitrary time.
    double interp(const std::string& name, double time_s) const {
        const std::size_t c = channel_index(name);
        return interp_index(c, time_s);
    }

    double interp_index(std::size_t c, double time_s) const {
        if (t.empty()) throw ConfigError("empty trajectory");
        if (time_s <= t.front()) return x.front()[c];
        if (time_s >= t.back()) return x.back()[c];
        const auto it = std::upper_bound(t.begin(), t.end(), time_s);
        const std::size_t j = static_cast<std::size_t>(it - t.begin());
        const double w = (time_s - t[j - 1]) / (t[j] - t[j - 1]);
        return (1.0 - w) * x[j - 1][c] + w * x[j][c];
    }

    double final_state(const std::string& name) const { return x.back()[channel_index(name)]; }
};

}  // namespace larvasim
