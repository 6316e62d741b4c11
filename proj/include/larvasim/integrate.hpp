#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "larvasim/errors.hpp"

namespace larvasim {

using RhsFn = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

inline constexpr double kNoBreakpoint = std::numeric_limits<double>::infinity();

/// Called after every accepted step (and once at t0).
using StepCallback = std::function<void(double t, std::span<const double> x)>;

/// Returns the next time > t at which the driving signals change
/// discontinuously (infinity when none); steps are clipped there so
/// piecewise-constant inputs never straddle a step.
using BreakpointFn = std::function<double(double t)>;

namespace detail {

inline void check_finite(double t, const std::vector<double>& x, const std::vector<double>& dxdt) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(dxdt[i])) {
            throw SimulationError("non-finite state or derivative (component " +
                                      std::to_string(i) + ") at t=" + std::to_string(t) + " s",
                                  t, x);
        }
    }
}

}  // namespace detail

/// One classic fourth-order Runge-Kutta step; reusable work buffers.
class Rk4Stepper {
public:
    explicit Rk4Stepper(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

    void step(const RhsFn& rhs, double t, std::vector<double>& x, double h) {
        const std::size_t n = x.size();
        rhs(t, x, k1_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
        rhs(t + 0.5 * h, tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
        rhs(t + 0.5 * h, tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
        rhs(t + h, tmp_, k4_);
        for (std::size_t i = 0; i < n; ++i)
            x[i] += h / 6.0 * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
    }

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Fixed-step RK4 over [t0, tf], clipping steps at breakpoints so input
/// discontinuities align with step boundaries. Aborts with a diagnostic when
/// the state goes non-finite.
inline std::vector<double> integrate_rk4(const RhsFn& rhs, std::vector<double> x,
                                         double t0, double tf, double dt,
                                         const StepCallback& on_step = {},
                                         const BreakpointFn& breakpoints = {}) {
    if (!(dt > 0.0)) throw ConfigError("integrate_rk4: dt must be positive");
    Rk4Stepper stepper(x.size());
    std::vector<double> dx_probe(x.size());
    double t = t0;
    if (on_step) on_step(t, x);
    const double t_eps = 1e-9 * std::max(1.0, std::abs(tf - t0));
    while (t < tf - t_eps) {
        double h = std::min(dt, tf - t);
        if (breakpoints) {
            const double tb = breakpoints(t);
            if (tb > t + t_eps) h = std::min(h, tb - t);
        }
        stepper.step(rhs, t, x, h);
        t += h;
        rhs(t, x, dx_probe);  // probe for the diagnostic; cheap relative to the step
        detail::check_finite(t, x, dx_probe);
        if (on_step) on_step(t, x);
    }
    return x;
}

struct AdaptiveOptions {
    double rtol = 1e-6;
    double atol = 1e-9;
    double h_init = 0.0;       // 0: choose from the first derivative
    double h_min = 0.0;        // 0: 1e-12 * span
    double h_max = 0.0;        // 0: span
    std::size_t max_steps = 200'000'000;
};

/// Embedded Cash-Karp 4(5) pair with standard step control. Serves as the
/// accuracy oracle for the fixed-step integrator. Throws StepSizeUnderflow
/// when the controller is forced below the step floor (stiffness symptom).
inline std::vector<double> integrate_adaptive(const RhsFn& rhs, std::vector<double> x,
                                              double t0, double tf, AdaptiveOptions opt = {},
                                              const StepCallback& on_step = {},
                                              const BreakpointFn& breakpoints = {}) {
    static constexpr double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
    static constexpr double b21 = 1.0 / 5;
    static constexpr double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static constexpr double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static constexpr double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static constexpr double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                            b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static constexpr double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594,
                            c6 = 512.0 / 1771;
    static constexpr double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                            d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = c6 - 1.0 / 4;

    const std::size_t n = x.size();
    const double span = tf - t0;
    if (!(span > 0.0)) throw ConfigError("integrate_adaptive: tf must exceed t0");
    const double h_min = opt.h_min > 0.0 ? opt.h_min : 1e-12 * span;
    const double h_max = opt.h_max > 0.0 ? opt.h_max : span;

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), xnew(n);
    double t = t0;
    if (on_step) on_step(t, x);

    rhs(t, x, k1);
    detail::check_finite(t, x, k1);
    double h = opt.h_init;
    if (h <= 0.0) {
        double dmax = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            dmax = std::max(dmax, std::abs(k1[i]) / (opt.atol + opt.rtol * std::abs(x[i])));
        h = dmax > 0.0 ? std::min(h_max, 0.01 / dmax) : std::min(1.0, h_max);
    }

    const double t_eps = 1e-12 * std::max(1.0, std::abs(span));
    std::size_t steps = 0;
    bool k1_fresh = true;
    while (t < tf - t_eps) {
        if (++steps > opt.max_steps)
            throw SimulationError("integrate_adaptive: step budget exhausted at t=" +
                                      std::to_string(t),
                                  t, x);
        h = std::min({h, h_max, tf - t});
        if (breakpoints) {
            const double tb = breakpoints(t);
            if (tb > t + t_eps) h = std::min(h, tb - t);
        }

        if (!k1_fresh) rhs(t, x, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * b21 * k1[i];
        rhs(t + a2 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * (b31 * k1[i] + b32 * k2[i]);
        rhs(t + a3 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = x[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
        rhs(t + a4 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = x[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
        rhs(t + a5 * h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = x[i] +
                     h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] + b65 * k5[i]);
        rhs(t + a6 * h, tmp, k6);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            xnew[i] = x[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
            const double e = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
            const double sk =
                opt.atol + opt.rtol * std::max(std::abs(x[i]), std::abs(xnew[i]));
            err = std::max(err, std::abs(e) / sk);
        }

        if (err <= 1.0 || h <= h_min * (1.0 + 1e-12)) {
            if (err > 1.0 && h <= h_min * (1.0 + 1e-12))
                throw StepSizeUnderflow(
                    "integrate_adaptive: step size underflow (h=" + std::to_string(h) +
                        ") at t=" + std::to_string(t) + "; system too stiff for the explicit pair",
                    t, x);
            t += h;
            x = xnew;
            detail::check_finite(t, x, k6);
            if (on_step) on_step(t, x);
            k1_fresh = false;
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h = std::max(h_min, h * std::clamp(grow, 0.2, 5.0));
        } else {
            const double shrink = 0.9 * std::pow(err, -0.25);
            h = std::max(h_min, h * std::clamp(shrink, 0.1, 0.9));
            k1_fresh = true;  // k1 still valid at unchanged t
        }
    }
    return x;
}

}  // namespace larvasim
