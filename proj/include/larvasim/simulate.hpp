#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "larvasim/events.hpp"
#include "larvasim/integrate.hpp"
#include "larvasim/providers.hpp"
#include "larvasim/reactor.hpp"
#include "larvasim/trajectory.hpp"

namespace larvasim {

struct SimOptions {
    double t0 = 0.0;
    double tf = 0.0;
    double dt = 3.6;              // fixed RK4 step [s]
    bool adaptive = false;        // use the embedded 4(5) oracle instead
    AdaptiveOptions adaptive_opt;
    double record_dt = 60.0;      // trajectory sampling stride [s]
    bool record_fluxes = false;
    std::size_t max_warnings = 20;
};

namespace detail {

/// Applies door-open intervals from the event schedule on top of another
/// input provider and exposes the interval edges as breakpoints.
class DoorOverlay final : public InputProvider {
public:
    DoorOverlay(const InputProvider& inner, const std::vector<Event>& events) : inner_(inner) {
        for (const auto& e : events)
            if (e.kind == Event::Kind::door)
                intervals_.emplace_back(e.time_s, e.time_s + e.duration_s);
        std::sort(intervals_.begin(), intervals_.end());
    }

    Inputs at(double t, std::span<const double> x) const override {
        Inputs u = inner_.at(t, x);
        for (const auto& [a, b] : intervals_)
            if (t >= a && t < b) u.u_d = std::max(u.u_d, 1.0);
        return u;
    }

    double next_breakpoint(double t) const override {
        double nb = inner_.next_breakpoint(t);
        for (const auto& [a, b] : intervals_) {
            if (a > t) { nb = std::min(nb, a); break; }
            if (b > t) nb = std::min(nb, b);
        }
        return nb;
    }

private:
    const InputProvider& inner_;
    std::vector<std::pair<double, double>> intervals_;
};

inline void apply_impulse(const Event& e, std::vector<double>& x, double& larvae) {
    switch (e.kind) {
        case Event::Kind::sample:
            if (e.count > larvae)
                throw SimulationError("sampling event removes more larvae than present (" +
                                          std::to_string(e.count) + " of " +
                                          std::to_string(larvae) + ")",
                                      e.time_s, x);
            larvae -= e.count;
            x[idx::B_med] -= 1e-3 * e.count * x[idx::B_wet];
            break;
        case Event::Kind::add_feed:
            x[idx::N_feed] += e.mass_kg;
            x[idx::B_med] += e.mass_kg;
            break;
        case Event::Kind::add_water:
            x[idx::W_med] += e.mass_kg;
            x[idx::B_med] += e.mass_kg;
            break;
        case Event::Kind::door:
            break;  // handled by the overlay
    }
}

}  // namespace detail

/// Integrate the reactor model over [t0, tf] with the given input policy,
/// disturbances, and discrete events, recording the trajectory on a uniform
/// grid. Integration proceeds segment-by-segment between input breakpoints
/// and event times; within a segment the input signals are evaluated with
/// the stage time clamped below the segment end, so zero-order-hold signals
/// never leak across their boundary. Impulsive events restart the
/// integration from the post-event state.
inline Trajectory simulate(ReactorModel model, std::vector<double> x0, const InputProvider& inputs,
                           const DisturbanceProvider& dist, const EventSchedule& schedule,
                           const SimOptions& opt) {
    if (x0.size() != model.dim())
        throw std::invalid_argument("simulate: initial state dimension does not match setup");
    if (!(opt.tf > opt.t0)) throw ConfigError("simulate: tf must exceed t0");
    schedule.validate(opt.t0, opt.tf);
    const auto events = schedule.sorted();
    detail::DoorOverlay overlay(inputs, events);

    Trajectory traj;
    traj.kind = model.kind;
    traj.names = state_names(model.kind);

    const double record_dt = std::max(opt.record_dt, 1e-9);
    const double t_eps = 1e-9 * std::max(1.0, opt.tf - opt.t0);
    double next_record = opt.t0;
    double larvae = model.L_num;

    auto record = [&](double t, std::span<const double> x) {
        Inputs u = overlay.at(t, x);
        Disturbance d = dist.at(t);
        if (!traj.t.empty() && t <= traj.t.back() + t_eps) {
            traj.x.back().assign(x.begin(), x.end());
            traj.u.back() = u;
            traj.d.back() = d;
            traj.larvae.back() = larvae;
            if (opt.record_fluxes) traj.fluxes.back() = model.flux_report(t, x, u, d);
            return;
        }
        traj.t.push_back(t);
        traj.x.emplace_back(x.begin(), x.end());
        traj.u.push_back(u);
        traj.d.push_back(d);
        traj.larvae.push_back(larvae);
        if (opt.record_fluxes) traj.fluxes.push_back(model.flux_report(t, x, u, d));
        if (x[idx::B_wet] < x[idx::B_dry] && traj.warnings.size() < opt.max_warnings)
            traj.warnings.push_back("B_wet below B_dry at t=" + std::to_string(t) + " s");
        for (std::size_t i : {idx::W_med, idx::N_feed, idx::N_exc})
            if (x[i] < -1e-9 && traj.warnings.size() < opt.max_warnings)
                traj.warnings.push_back("negative mass state " + traj.names[i] +
                                        " at t=" + std::to_string(t) + " s");
    };

    auto on_step = [&](double t, std::span<const double> x) {
        if (t + t_eps >= next_record || t + t_eps >= opt.tf) {
            record(t, x);
            while (next_record <= t + t_eps) next_record += record_dt;
        }
    };

    std::vector<double> x = std::move(x0);
    double t = opt.t0;
    std::size_t ev = 0;
    // events scheduled exactly at t0 apply before integration starts
    while (ev < events.size() && events[ev].time_s <= t + t_eps) {
        detail::apply_impulse(events[ev], x, larvae);
        ++ev;
    }
    record(t, x);
    while (next_record <= t + t_eps) next_record += record_dt;

    while (t < opt.tf - t_eps) {
        double t_end = opt.tf;
        if (ev < events.size()) t_end = std::min(t_end, events[ev].time_s);
        const double brk = overlay.next_breakpoint(t);
        if (brk > t + t_eps) t_end = std::min(t_end, brk);

        if (t_end > t + t_eps) {
            model.L_num = larvae;
            const ReactorModel& m = model;
            const double t_hold_max = t_end - t_eps;
            RhsFn rhs = [&m, &overlay, &dist, t_hold_max](double tt, std::span<const double> xx,
                                                          std::span<double> dx) {
                const double tu = std::min(tt, t_hold_max);
                m.rhs(tt, xx, overlay.at(tu, xx), dist.at(tt), dx);
            };
            if (opt.adaptive)
                x = integrate_adaptive(rhs, std::move(x), t, t_end, opt.adaptive_opt, on_step);
            else
                x = integrate_rk4(rhs, std::move(x), t, t_end, opt.dt, on_step);
            t = t_end;
        } else {
            t = t_end;
        }

        while (ev < events.size() && events[ev].time_s <= t + t_eps) {
            if (events[ev].kind != Event::Kind::door) {
                detail::apply_impulse(events[ev], x, larvae);
                record(t, x);  // overwrite the sample with the post-event state
            }
            ++ev;
        }
    }
    if (traj.t.empty() || traj.t.back() < opt.tf - t_eps) record(opt.tf, x);
    return traj;
}

}  // namespace larvasim
