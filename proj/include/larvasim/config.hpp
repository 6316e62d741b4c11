#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "larvasim/csv.hpp"
#include "larvasim/estimate.hpp"
#include "larvasim/scenarios.hpp"
#include "larvasim/simulate.hpp"

namespace larvasim {

using Json = nlohmann::json;

/// Resolve a config path, falling back to the directory named by
/// LARVASIM_CONFIG_DIR for bare or relative names.
inline std::string resolve_config_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    if (const char* dir = std::getenv("LARVASIM_CONFIG_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    throw ConfigError("config file not found: " + path);
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(resolve_config_path(path));
    if (!in) throw ConfigError("cannot open: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("JSON parse error in " + path + ": " + e.what());
    }
}

/// A full run description: setup, parameters, initial state, drivers,
/// events, integrator settings, and the command-specific blocks.
struct RunConfig {
    Json raw;
    SetupKind setup = SetupKind::closed;
    double larvae = 0.0;
    Params params;
    ModelOptions options;
    std::vector<double> x0;
    EventSchedule events;
    SimOptions sim;

    std::shared_ptr<InputProvider> inputs;
    std::shared_ptr<DisturbanceProvider> disturbance;

    ReactorModel model() const { return ReactorModel::make(setup, params, larvae, options); }
};

namespace detail {

inline void require_object(const Json& j, const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

inline double num_or(const Json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError("field '" + key + "' must be numeric");
    return j.at(key).get<double>();
}

inline bool bool_or(const Json& j, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError("field '" + key + "' must be boolean");
    return j.at(key).get<bool>();
}

inline std::shared_ptr<DisturbanceProvider> parse_disturbance(const Json& j) {
    if (j.is_null()) return std::make_shared<ConstantDisturbance>();
    require_object(j, "disturbance");
    if (j.contains("file")) {
        const SensorLog log = load_sensor_csv(j.at("file").get<std::string>());
        std::vector<Disturbance> values(log.time_s.size());
        Disturbance defaults;
        auto fill = [&](const std::string& name, auto setter) {
            if (!log.has(name)) return;
            auto v = log.channel(name);
            for (std::size_t i = 0; i < v.size(); ++i) setter(values[i], v[i]);
        };
        for (auto& v : values) v = defaults;
        fill("T_out", [](Disturbance& d, double v) { d.T_out = v; });
        fill("H_out", [](Disturbance& d, double v) { d.H_out = v; });
        fill("C_out", [](Disturbance& d, double v) { d.C_out = v; });
        fill("O_out", [](Disturbance& d, double v) { d.O_out = v; });
        return std::make_shared<TraceDisturbance>(log.time_s, values);
    }
    const Json c = j.value("constants", Json::object());
    Disturbance d;
    d.T_out = num_or(c, "T_out", d.T_out);
    d.H_out = num_or(c, "H_out", d.H_out);
    d.C_out = num_or(c, "C_out", d.C_out);
    d.O_out = num_or(c, "O_out", d.O_out);
    return std::make_shared<ConstantDisturbance>(d);
}

inline Inputs parse_input_values(const Json& c) {
    Inputs u;
    u.u_v = num_or(c, "u_v", 0.0);
    u.u_d = num_or(c, "u_d", 0.0);
    u.u_T = num_or(c, "u_T", 0.0);
    u.u_H = num_or(c, "u_H", 0.0);
    u.u_W_med = num_or(c, "u_W_med", 0.0);
    u.u_N = num_or(c, "u_N", 0.0);
    u.u_fan = num_or(c, "u_fan", 0.0);
    u.u_h = num_or(c, "u_h", 0.0);
    u.u_W_sto = num_or(c, "u_W_sto", 0.0);
    u.u_W_ovf = num_or(c, "u_W_ovf", 0.0);
    for (int i = 0; i < 4; ++i)
        u.u_I[i] = num_or(c, "u_I" + std::to_string(i + 1), 0.0);
    u.u_dT = num_or(c, "u_dT", 0.0);
    u.u_dH = num_or(c, "u_dH", 0.0);
    u.u_W_flow = num_or(c, "u_W_flow", 0.0);
    u.u_N_flow = num_or(c, "u_N_flow", 0.0);
    return u;
}

inline std::shared_ptr<InputProvider> parse_inputs(const Json& j, SetupKind kind) {
    if (j.is_null()) return std::make_shared<ConstantInputs>();
    require_object(j, "inputs");
    if (j.contains("policy")) {
        const std::string policy = j.at("policy").get<std::string>();
        if (policy == "vent_thermostat") {
            if (kind != SetupKind::closed)
                throw ConfigError("vent_thermostat policy applies to the closed setup");
            auto p = std::make_shared<PeriodicVentThermostat>();
            p->vent_on_s = 60.0 * num_or(j, "vent_on_min", 10.0);
            p->vent_off_s = 60.0 * num_or(j, "vent_off_min", 20.0);
            p->T_set = num_or(j, "T_set", 29.0);
            p->thermostat_gain = num_or(j, "gain", 0.8);
            if (j.contains("base")) p->base = parse_input_values(j.at("base"));
            return p;
        }
        throw ConfigError("unknown input policy: " + policy);
    }
    const Inputs u = parse_input_values(j.value("constants", Json::object()));
    validate_inputs(kind, u);
    return std::make_shared<ConstantInputs>(u);
}

inline EventSchedule parse_events(const Json& j) {
    EventSchedule sched;
    if (j.is_null()) return sched;
    if (!j.is_array()) throw ConfigError("events must be an array");
    for (const auto& e : j) {
        require_object(e, "event");
        Event ev;
        const std::string kind = e.at("kind").get<std::string>();
        ev.time_s = 3600.0 * num_or(e, "time_h", 0.0);
        if (kind == "sample") {
            ev.kind = Event::Kind::sample;
            ev.count = num_or(e, "count", 0.0);
        } else if (kind == "door") {
            ev.kind = Event::Kind::door;
            ev.duration_s = 60.0 * num_or(e, "duration_min", 5.0);
        } else if (kind == "add_feed") {
            ev.kind = Event::Kind::add_feed;
            ev.mass_kg = num_or(e, "mass_kg", 0.0);
        } else if (kind == "add_water") {
            ev.kind = Event::Kind::add_water;
            ev.mass_kg = num_or(e, "mass_kg", 0.0);
        } else {
            throw ConfigError("unknown event kind: " + kind);
        }
        sched.events.push_back(ev);
    }
    return sched;
}

}  // namespace detail

inline RunConfig parse_run_config(const Json& j) {
    detail::require_object(j, "run config");
    RunConfig cfg;
    cfg.raw = j;
    cfg.setup = setup_from_string(j.value("setup", std::string("closed")));
    cfg.larvae = detail::num_or(j, "larvae", 0.0);
    if (cfg.larvae < 0.0) throw ConfigError("larvae count must be non-negative");

    if (j.contains("parameters")) {
        detail::require_object(j.at("parameters"), "parameters");
        for (const auto& [key, value] : j.at("parameters").items()) {
            if (!value.is_number()) throw ConfigError("parameter '" + key + "' must be numeric");
            cfg.params.set(key, value.get<double>());
        }
    }
    if (j.contains("options")) {
        const Json& o = j.at("options");
        detail::require_object(o, "options");
        cfg.options.maturity_smoothing_h = detail::num_or(o, "maturity_smoothing_h", 0.0);
        cfg.options.assimilation_taper = detail::bool_or(o, "assimilation_taper", false);
        cfg.options.eps_evap_continuous = detail::bool_or(o, "eps_evap_continuous", false);
        cfg.options.tec_kelvin_scale = detail::bool_or(o, "tec_kelvin_scale", false);
    }

    cfg.x0.assign(state_dim(cfg.setup), 0.0);
    if (j.contains("initial_state")) {
        detail::require_object(j.at("initial_state"), "initial_state");
        const auto names = state_names(cfg.setup);
        for (const auto& [key, value] : j.at("initial_state").items()) {
            bool found = false;
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == key) {
                    cfg.x0[i] = value.get<double>();
                    found = true;
                }
            if (!found)
                throw ConfigError("initial_state key '" + key + "' is not a state of the " +
                                  to_string(cfg.setup) + " setup");
        }
    }

    const Json integ = j.value("integrator", Json::object());
    cfg.sim.t0 = 3600.0 * detail::num_or(integ, "t0_h", 0.0);
    cfg.sim.tf = 3600.0 * detail::num_or(integ, "tf_h", 192.0);
    cfg.sim.dt = detail::num_or(integ, "dt_s", 3.6);
    cfg.sim.record_dt = detail::num_or(integ, "record_dt_s", 60.0);
    cfg.sim.record_fluxes = detail::bool_or(integ, "record_fluxes", false);
    const std::string method = integ.value("method", std::string("rk4"));
    if (method == "rk45") {
        cfg.sim.adaptive = true;
        cfg.sim.adaptive_opt.rtol = detail::num_or(integ, "tol", 1e-6);
        cfg.sim.adaptive_opt.atol = 1e-3 * cfg.sim.adaptive_opt.rtol;
    } else if (method != "rk4") {
        throw ConfigError("unknown integrator method: " + method);
    }
    if (!(cfg.sim.tf > cfg.sim.t0)) throw ConfigError("tf_h must exceed t0_h");
    if (!(cfg.sim.dt > 0.0)) throw ConfigError("dt_s must be positive");

    cfg.events = detail::parse_events(j.value("events", Json()));
    cfg.events.validate(cfg.sim.t0, cfg.sim.tf);
    cfg.disturbance = detail::parse_disturbance(j.value("disturbance", Json()));
    cfg.inputs = detail::parse_inputs(j.value("inputs", Json()), cfg.setup);
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    return parse_run_config(load_json_file(path));
}

}  // namespace larvasim
