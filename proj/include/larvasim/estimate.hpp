#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "larvasim/nls.hpp"
#include "larvasim/simulate.hpp"

namespace larvasim {

/// Measured outputs for parameter estimation: channels sampled on a shared
/// time grid, matched against trajectory channels by name.
struct Dataset {
    struct Channel {
        std::string name;            // state name or "B_tot"
        std::vector<double> values;
        bool use = true;
        double scale = 0.0;          // residual scaling; 0 = channel standard deviation
    };
    std::vector<double> times;       // [s]
    std::vector<Channel> channels;

    void validate() const {
        if (times.empty()) throw ConfigError("dataset has no samples");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw ConfigError("dataset times must increase");
        for (const auto& c : channels)
            if (c.values.size() != times.size())
                throw ConfigError("dataset channel '" + c.name + "' length mismatch");
    }
};

/// A bound-constrained nonlinear least-squares problem: simulate the model
/// under candidate parameters and match the dataset channels.
struct EstimationProblem {
    ReactorModel model;
    std::vector<double> x0;
    const InputProvider* inputs = nullptr;
    const DisturbanceProvider* disturbances = nullptr;
    EventSchedule events;
    SimOptions sim;
    Dataset data;
    std::vector<std::string> free_names;
    std::vector<double> lower, upper;

    void validate() const {
        data.validate();
        if (free_names.empty()) throw ConfigError("no free parameters");
        if (lower.size() != free_names.size() || upper.size() != free_names.size())
            throw ConfigError("bound sizes must match the free parameter list");
        for (std::size_t i = 0; i < free_names.size(); ++i) {
            if (!Params::has(free_names[i]))
                throw ConfigError("unknown free parameter: " + free_names[i]);
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
                throw ConfigError("bounds must be finite with lower < upper for " + free_names[i]);
        }
        if (!inputs || !disturbances) throw ConfigError("estimation problem needs providers");
        if (data.times.back() > sim.tf)
            throw ConfigError("dataset extends beyond the simulation horizon");
    }
};

namespace detail {

inline double channel_value(const Trajectory& traj, const std::string& name, double t,
                            double larvae) {
    if (name == "B_tot") return larvae * traj.interp("B_dry", t);
    return traj.interp(name, t);
}

inline double channel_scale(const Dataset::Channel& c) {
    if (c.scale > 0.0) return c.scale;
    double mean = 0.0;
    for (double v : c.values) mean += v;
    mean /= static_cast<double>(c.values.size());
    double var = 0.0;
    for (double v : c.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(c.values.size());
    const double sd = std::sqrt(var);
    return sd > 0.0 ? sd : 1.0;
}

inline bool is_rate_shape_param(const std::string& name) {
    return name == "k_rT_min" || name == "k_rT_opt" || name == "k_rT_max" ||
           name == "k_rF_half" || name == "k_rA_half";
}

inline ReactorModel model_with(const ReactorModel& base, const std::vector<std::string>& names,
                               const std::vector<double>& values) {
    ReactorModel m = base;
    bool shapes_changed = false;
    for (std::size_t i = 0; i < names.size(); ++i) {
        m.p.set(names[i], values[i]);
        shapes_changed = shapes_changed || is_rate_shape_param(names[i]);
    }
    // freeing a shape parameter implies the default response families
    if (shapes_changed) m.rates = RateFunctions::defaults(m.p);
    return m;
}

}  // namespace detail

/// Stacked residual vector (measured - modeled, per channel scaling applied)
/// at a candidate free-parameter vector. Simulation failures propagate with
/// the parameter context attached.
inline std::vector<double> residuals(const EstimationProblem& prob,
                                     const std::vector<double>& p_free) {
    ReactorModel m = detail::model_with(prob.model, prob.free_names, p_free);
    Trajectory traj;
    try {
        traj = simulate(m, prob.x0, *prob.inputs, *prob.disturbances, prob.events, prob.sim);
    } catch (const SimulationError& e) {
        std::string ctx = "simulation failed for parameters {";
        for (std::size_t i = 0; i < p_free.size(); ++i)
            ctx += (i ? ", " : "") + prob.free_names[i] + "=" + std::to_string(p_free[i]);
        throw SimulationError(ctx + "}: " + e.what(), e.time_s, e.state);
    }
    std::vector<double> r;
    for (const auto& c : prob.data.channels) {
        if (!c.use) continue;
        const double s = detail::channel_scale(c);
        for (std::size_t k = 0; k < prob.data.times.size(); ++k) {
            const double y = detail::channel_value(traj, c.name, prob.data.times[k], m.L_num);
            r.push_back((c.values[k] - y) / s);
        }
    }
    return r;
}

/// Coefficient of determination of one channel. Throws on degenerate data.
inline double r_squared(const std::vector<double>& measured, const std::vector<double>& modeled) {
    if (measured.size() != modeled.size() || measured.size() < 2)
        throw ConfigError("r_squared: need at least two paired samples");
    double mean = 0.0;
    for (double v : measured) mean += v;
    mean /= static_cast<double>(measured.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        ss_tot += (measured[i] - mean) * (measured[i] - mean);
        ss_res += (measured[i] - modeled[i]) * (measured[i] - modeled[i]);
    }
    if (ss_tot == 0.0) throw ConfigError("r_squared: zero-variance channel");
    return 1.0 - ss_res / ss_tot;
}

struct FitResult {
    std::map<std::string, double> parameters;
    double rss = 0.0;
    std::map<std::string, double> r2;          // per used channel
    std::size_t best_start = 0;
    std::vector<MinimizeResult> starts;
};

/// Multistart bounded least squares over the free parameters.
inline FitResult fit(const EstimationProblem& prob, std::size_t n_starts, std::uint64_t seed,
                     const MinimizeOptions& opt = {}) {
    prob.validate();
    ObjectiveFn obj = [&prob](const std::vector<double>& p) {
        double ss = 0.0;
        for (double ri : residuals(prob, p)) ss += ri * ri;
        return ss;
    };
    MultistartResult ms = multistart_minimize(obj, prob.lower, prob.upper, n_starts, seed, opt);

    FitResult out;
    out.rss = ms.best.f;
    out.best_start = ms.best_index;
    out.starts = std::move(ms.starts);
    for (std::size_t i = 0; i < prob.free_names.size(); ++i)
        out.parameters[prob.free_names[i]] = ms.best.x[i];

    // goodness of fit per channel at the optimum
    ReactorModel m = detail::model_with(prob.model, prob.free_names, ms.best.x);
    Trajectory traj = simulate(m, prob.x0, *prob.inputs, *prob.disturbances, prob.events, prob.sim);
    for (const auto& c : prob.data.channels) {
        if (!c.use) continue;
        std::vector<double> modeled;
        for (double tk : prob.data.times)
            modeled.push_back(detail::channel_value(traj, c.name, tk, m.L_num));
        out.r2[c.name] = r_squared(c.values, modeled);
    }
    return out;
}

}  // namespace larvasim
