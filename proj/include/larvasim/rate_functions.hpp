#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "larvasim/errors.hpp"
#include "larvasim/parameters.hpp"

namespace larvasim {

/// Smooth positive part: ~max(x, 0) with a rounded corner of width eps.
/// Keeps right-hand sides differentiable when resources approach zero.
inline double smooth_pos(double x, double eps = 1e-9) {
    return 0.5 * (x + std::sqrt(x * x + eps * eps));
}

/// Cardinal temperature response (beta-type curve with inflection): zero at
/// and outside (t_min, t_max), unit value at t_opt.
inline double cardinal_temperature(double t, double t_min, double t_opt, double t_max) {
    if (t <= t_min || t >= t_max) return 0.0;
    const double num = (t - t_max) * (t - t_min) * (t - t_min);
    const double den = (t_opt - t_min) *
                       ((t_opt - t_min) * (t - t_opt) - (t_opt - t_max) * (t_opt + t_min - 2.0 * t));
    if (den == 0.0) return 0.0;
    const double r = num / den;
    return r > 0.0 ? r : 0.0;
}

/// Monod saturation in the resource amount; vanishes smoothly as the
/// resource is depleted.
inline double monod(double amount, double half) {
    const double a = smooth_pos(amount);
    return a / (a + half);
}

/// Hard maturity switch: 1 iff lo < t_sigma < hi.
inline double maturity_switch(double t_sigma_h, const Params& p) {
    return (t_sigma_h > p.k_TSigma1 && t_sigma_h < p.k_TSigma3) ? 1.0 : 0.0;
}

/// Maturity activation with optional sigmoid smoothing of the window edges
/// (width in development-hours; 0 reproduces the hard switch).
inline double maturity_activation(double t_sigma_h, const Params& p, double smoothing_h) {
    if (smoothing_h <= 0.0) return maturity_switch(t_sigma_h, p);
    const auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    return sig((t_sigma_h - p.k_TSigma1) / smoothing_h) *
           sig((p.k_TSigma3 - t_sigma_h) / smoothing_h);
}

/// Optional assimilation taper: fades the assimilation response linearly
/// from 1 at k_TSigma1 to 0 at k_TSigma2 and beyond.
inline double assimilation_taper(double t_sigma_h, const Params& p) {
    if (t_sigma_h <= p.k_TSigma1) return 1.0;
    if (t_sigma_h >= p.k_TSigma2) return 0.0;
    return (p.k_TSigma2 - t_sigma_h) / (p.k_TSigma2 - p.k_TSigma1);
}

/// The pluggable growth-regulation response set. Each member returns a raw
/// (unnormalized) response; normalization against k_rmax* happens where the
/// process rates are assembled. Defaults are configurable families meant to
/// be re-parameterized or replaced wholesale for a given larva line.
struct RateFunctions {
    std::function<double(double)> temperature;  // of medium temperature [degC]
    std::function<double(double)> feed;         // of unused feed mass [kg]
    std::function<double(double)> air;          // of O2:CO2 concentration ratio [-]

    static RateFunctions defaults(const Params& p) {
        RateFunctions rf;
        rf.temperature = [tmin = p.k_rT_min, topt = p.k_rT_opt, tmax = p.k_rT_max](double t) {
            return cardinal_temperature(t, tmin, topt, tmax);
        };
        rf.feed = [half = p.k_rF_half](double n) { return monod(n, half); };
        rf.air = [half = p.k_rA_half](double a) { return monod(a, half); };
        return rf;
    }

    /// All responses pinned at 1; useful for isolating other model parts.
    static RateFunctions flat() {
        RateFunctions rf;
        rf.temperature = [](double) { return 1.0; };
        rf.feed = [](double) { return 1.0; };
        rf.air = [](double) { return 1.0; };
        return rf;
    }

    /// Build a named family set from a config string per channel.
    static std::function<double(double)> family(const std::string& name, const Params& p,
                                                const std::string& channel) {
        if (name == "flat") return [](double) { return 1.0; };
        if (channel == "temperature" && name == "cardinal")
            return [tmin = p.k_rT_min, topt = p.k_rT_opt, tmax = p.k_rT_max](double t) {
                return cardinal_temperature(t, tmin, topt, tmax);
            };
        if (channel == "feed" && name == "monod")
            return [half = p.k_rF_half](double n) { return monod(n, half); };
        if (channel == "air" && name == "saturating")
            return [half = p.k_rA_half](double a) { return monod(a, half); };
        throw ConfigError("unknown rate-function family '" + name + "' for channel " + channel);
    }
};

}  // namespace larvasim
