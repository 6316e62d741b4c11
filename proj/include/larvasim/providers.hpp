#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "larvasim/errors.hpp"
#include "larvasim/integrate.hpp"
#include "larvasim/state.hpp"

namespace larvasim {

/// Supplies actuator signals along a run. Implementations may be pure time
/// schedules or state-feedback policies; next_breakpoint reports upcoming
/// discontinuities so integrators can align steps with them.
class InputProvider {
public:
    virtual ~InputProvider() = default;
    virtual Inputs at(double t, std::span<const double> x) const = 0;
    virtual double next_breakpoint(double /*t*/) const { return kNoBreakpoint; }
};

class ConstantInputs final : public InputProvider {
public:
    ConstantInputs() = default;
    explicit ConstantInputs(Inputs u) : u_(u) {}
    Inputs at(double, std::span<const double>) const override { return u_; }

private:
    Inputs u_;
};

/// Zero-order-hold schedule on a uniform control grid.
class ScheduleInputs final : public InputProvider {
public:
    ScheduleInputs(double t0, double dt, std::vector<Inputs> values)
        : t0_(t0), dt_(dt), values_(std::move(values)) {
        if (!(dt_ > 0.0) || values_.empty()) throw ConfigError("ScheduleInputs: bad grid");
    }

    Inputs at(double t, std::span<const double>) const override {
        return values_[interval(t)];
    }

    double next_breakpoint(double t) const override {
        const std::size_t k = interval(t);
        if (k + 1 >= values_.size()) return kNoBreakpoint;
        return t0_ + static_cast<double>(k + 1) * dt_;
    }

private:
    std::size_t interval(double t) const {
        const double s = (t - t0_) / dt_;
        const auto k = static_cast<long>(std::floor(s + 1e-9));
        return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(values_.size()) - 1));
    }

    double t0_, dt_;
    std::vector<Inputs> values_;
};

/// Arbitrary state-feedback policy with optional breakpoint hints.
class PolicyInputs final : public InputProvider {
public:
    using Fn = std::function<Inputs(double, std::span<const double>)>;
    using BreakFn = std::function<double(double)>;
    explicit PolicyInputs(Fn fn, BreakFn brk = {}) : fn_(std::move(fn)), brk_(std::move(brk)) {}
    Inputs at(double t, std::span<const double> x) const override { return fn_(t, x); }
    double next_breakpoint(double t) const override { return brk_ ? brk_(t) : kNoBreakpoint; }

private:
    Fn fn_;
    BreakFn brk_;
};

/// Growth-trial operating policy for the closed setup: periodic ventilation
/// (on/off duty cycle) plus a proportional thermostat driving the TEC to hold
/// the air temperature.
class PeriodicVentThermostat final : public InputProvider {
public:
    double vent_on_s = 600.0;
    double vent_off_s = 1200.0;
    double T_set = 29.0;
    double thermostat_gain = 0.8;  // TEC drive per kelvin of error
    Inputs base;                   // other channels (LEDs, humidifier, ...)

    Inputs at(double t, std::span<const double> x) const override {
        Inputs u = base;
        u.u_v = vent_phase(t) ? 1.0 : 0.0;
        const double T_air = x.size() > idx::T_air ? x[idx::T_air] : T_set;
        u.u_T = std::clamp(thermostat_gain * (T_set - T_air), -1.0, 1.0);
        return u;
    }

    double next_breakpoint(double t) const override {
        const double period = vent_on_s + vent_off_s;
        const double phase = t - std::floor(t / period) * period;
        const double next = phase < vent_on_s ? vent_on_s - phase : period - phase;
        return t + std::max(next, 1e-9);
    }

private:
    bool vent_phase(double t) const {
        const double period = vent_on_s + vent_off_s;
        const double phase = t - std::floor(t / period) * period;
        return phase < vent_on_s;
    }
};

/// External conditions along a run.
class DisturbanceProvider {
public:
    virtual ~DisturbanceProvider() = default;
    virtual Disturbance at(double t) const = 0;
};

class ConstantDisturbance final : public DisturbanceProvider {
public:
    ConstantDisturbance() = default;
    explicit ConstantDisturbance(Disturbance d) : d_(d) {}
    Disturbance at(double) const override { return d_; }

private:
    Disturbance d_;
};

/// Sampled disturbance trace, linearly interpolated between samples and held
/// constant beyond the ends.
class TraceDisturbance final : public DisturbanceProvider {
public:
    TraceDisturbance(std::vector<double> times, std::vector<Disturbance> values)
        : t_(std::move(times)), v_(std::move(values)) {
        if (t_.size() != v_.size() || t_.empty())
            throw ConfigError("TraceDisturbance: times and values must match and be non-empty");
        for (std::size_t i = 1; i < t_.size(); ++i)
            if (!(t_[i] > t_[i - 1])) throw ConfigError("TraceDisturbance: times must increase");
    }

    Disturbance at(double t) const override {
        if (t <= t_.front()) return v_.front();
        if (t >= t_.back()) return v_.back();
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const std::size_t j = static_cast<std::size_t>(it - t_.begin());
        const double w = (t - t_[j - 1]) / (t_[j] - t_[j - 1]);
        Disturbance d;
        d.T_out = (1 - w) * v_[j - 1].T_out + w * v_[j].T_out;
        d.H_out = (1 - w) * v_[j - 1].H_out + w * v_[j].H_out;
        d.C_out = (1 - w) * v_[j - 1].C_out + w * v_[j].C_out;
        d.O_out = (1 - w) * v_[j - 1].O_out + w * v_[j].O_out;
        return d;
    }

private:
    std::vector<double> t_;
    std::vector<Disturbance> v_;
};

class LambdaDisturbance final : public DisturbanceProvider {
public:
    using Fn = std::function<Disturbance(double)>;
    explicit LambdaDisturbance(Fn fn) : fn_(std::move(fn)) {}
    Disturbance at(double t) const override { return fn_(t); }

private:
    Fn fn_;
};

}  // namespace larvasim
