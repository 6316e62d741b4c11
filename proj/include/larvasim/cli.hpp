#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "larvasim/config.hpp"
#include "larvasim/estimate.hpp"
#include "larvasim/ocp.hpp"
#include "larvasim/scenarios.hpp"

namespace larvasim::cli {

inline constexpr int kSchemaVersion = 1;

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path);
    out << text;
}

inline void emit_json(const Json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text(out_path, text);
}

inline Json account_to_json(const ResourceAccount& a) {
    return Json{{"heating_energy_J", a.heating_energy_J},
                {"humidification_water_kg", a.humidification_water_kg},
                {"substrate_water_kg", a.substrate_water_kg},
                {"terminal_B_dry_g", a.terminal_B_dry_g},
                {"terminal_W_med_kg", a.terminal_W_med_kg},
                {"terminal_N_med_kg", a.terminal_N_med_kg}};
}

inline ResourceAccount account_from_json(const Json& j) {
    ResourceAccount a;
    a.heating_energy_J = j.at("heating_energy_J").get<double>();
    a.humidification_water_kg = j.at("humidification_water_kg").get<double>();
    a.substrate_water_kg = j.at("substrate_water_kg").get<double>();
    a.terminal_B_dry_g = j.at("terminal_B_dry_g").get<double>();
    a.terminal_W_med_kg = j.at("terminal_W_med_kg").get<double>();
    a.terminal_N_med_kg = j.at("terminal_N_med_kg").get<double>();
    return a;
}

inline void export_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::vector<std::string> header = {"time_s"};
    header.insert(header.end(), traj.names.begin(), traj.names.end());
    header.push_back("L_num");
    header.push_back("B_tot");
    const bool closed = traj.kind == SetupKind::closed;
    if (closed) {
        for (const char* n : {"u_v", "u_d", "u_T", "u_H", "u_W_med", "u_N", "u_fan", "u_h",
                              "u_I1", "u_I2", "u_I3", "u_I4"})
            header.push_back(n);
    } else {
        for (const char* n : {"u_dT", "u_dH", "u_W_flow", "u_N_flow"}) header.push_back(n);
    }
    for (const char* n : {"T_out", "H_out", "C_out", "O_out"}) header.push_back(n);
    const bool with_fluxes = !traj.fluxes.empty();
    if (with_fluxes) {
        for (const auto& k : FluxReport::flux_keys()) header.push_back(k);
        for (const auto& k : FluxReport::rate_keys()) header.push_back(k);
    }

    std::vector<std::vector<double>> rows;
    rows.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::vector<double> r;
        r.push_back(traj.t[i]);
        r.insert(r.end(), traj.x[i].begin(), traj.x[i].end());
        r.push_back(traj.larvae[i]);
        r.push_back(traj.larvae[i] * traj.x[i][idx::B_dry]);
        const Inputs& u = traj.u[i];
        if (closed) {
            for (double v : {u.u_v, u.u_d, u.u_T, u.u_H, u.u_W_med, u.u_N, u.u_fan, u.u_h,
                             u.u_I[0], u.u_I[1], u.u_I[2], u.u_I[3]})
                r.push_back(v);
        } else {
            for (double v : {u.u_dT, u.u_dH, u.u_W_flow, u.u_N_flow}) r.push_back(v);
        }
        const Disturbance& d = traj.d[i];
        for (double v : {d.T_out, d.H_out, d.C_out, d.O_out}) r.push_back(v);
        if (with_fluxes) {
            for (const auto& [_, v] : traj.fluxes[i].flux_entries()) r.push_back(v);
            for (const auto& [_, v] : traj.fluxes[i].rate_entries()) r.push_back(v);
        }
        rows.push_back(std::move(r));
    }
    save_csv(path, header, rows);
}

namespace detail {

inline int cmd_simulate(const std::string& config_path, const std::string& out_path,
                        bool with_fluxes) {
    RunConfig cfg = load_run_config(config_path);
    if (with_fluxes) cfg.sim.record_fluxes = true;
    Trajectory traj =
        simulate(cfg.model(), cfg.x0, *cfg.inputs, *cfg.disturbance, cfg.events, cfg.sim);
    for (const auto& wmsg : traj.warnings) std::fprintf(stderr, "warning: %s\n", wmsg.c_str());
    export_trajectory_csv(out_path, traj);
    return 0;
}

inline int cmd_fluxes(const std::string& config_path, const std::string& out_path) {
    RunConfig cfg = load_run_config(config_path);
    const auto model = cfg.model();
    const Inputs u = cfg.inputs->at(cfg.sim.t0, cfg.x0);
    const Disturbance d = cfg.disturbance->at(cfg.sim.t0);
    const FluxReport rep = model.flux_report(cfg.sim.t0, cfg.x0, u, d);
    Json fluxes = Json::object(), rates = Json::object();
    for (const auto& [k, v] : rep.flux_entries()) fluxes[k] = v;
    for (const auto& [k, v] : rep.rate_entries()) rates[k] = v;
    emit_json(Json{{"schema_version", kSchemaVersion},
                   {"time_s", cfg.sim.t0},
                   {"setup", to_string(cfg.setup)},
                   {"fluxes", fluxes},
                   {"rates", rates}},
              out_path);
    return 0;
}

inline int cmd_estimate(const std::string& config_path, const std::string& out_path,
                        const std::string& residual_csv) {
    RunConfig cfg = load_run_config(config_path);
    if (!cfg.raw.contains("estimation"))
        throw ConfigError("config lacks an 'estimation' block");
    const Json& e = cfg.raw.at("estimation");

    EstimationProblem prob;
    prob.model = cfg.model();
    prob.x0 = cfg.x0;
    prob.inputs = cfg.inputs.get();
    prob.disturbances = cfg.disturbance.get();
    prob.events = cfg.events;
    prob.sim = cfg.sim;

    const SensorLog log = load_sensor_csv(e.at("dataset").get<std::string>());
    for (const auto& wmsg : log.warnings) std::fprintf(stderr, "warning: %s\n", wmsg.c_str());
    prob.data.times = log.time_s;
    if (!e.contains("channels")) throw ConfigError("estimation block needs 'channels'");
    for (const auto& cj : e.at("channels")) {
        Dataset::Channel c;
        c.name = cj.at("name").get<std::string>();
        c.values = log.channel(c.name);
        c.scale = cj.value("scale", 0.0);
        c.use = cj.value("use", true);
        prob.data.channels.push_back(std::move(c));
    }
    if (!e.contains("free")) throw ConfigError("estimation block needs 'free'");
    for (const auto& fj : e.at("free")) {
        const std::string name = fj.at("name").get<std::string>();
        prob.free_names.push_back(name);
        if (fj.contains("lower") && fj.contains("upper")) {
            prob.lower.push_back(fj.at("lower").get<double>());
            prob.upper.push_back(fj.at("upper").get<double>());
        } else {
            const auto [lo, hi] = default_bounds(name, prob.model.p);
            prob.lower.push_back(lo);
            prob.upper.push_back(hi);
        }
    }
    const auto n_starts = e.value("starts", 8u);
    const auto seed = e.value("seed", 1u);

    FitResult fr = fit(prob, n_starts, seed);

    Json starts = Json::array();
    for (const auto& s : fr.starts)
        starts.push_back(Json{{"objective", s.f},
                              {"converged", s.converged},
                              {"failed", s.failed},
                              {"iterations", s.iters},
                              {"message", s.message}});
    emit_json(Json{{"schema_version", kSchemaVersion},
                   {"parameters", fr.parameters},
                   {"rss", fr.rss},
                   {"r2", fr.r2},
                   {"best_start", fr.best_start},
                   {"starts", starts}},
              out_path);

    if (!residual_csv.empty()) {
        std::vector<double> best;
        for (const auto& name : prob.free_names) best.push_back(fr.parameters.at(name));
        const auto res = residuals(prob, best);
        std::vector<std::string> header = {"time_s"};
        for (const auto& c : prob.data.channels)
            if (c.use) header.push_back("residual_" + c.name);
        const std::size_t nt = prob.data.times.size();
        std::vector<std::vector<double>> rows(nt);
        for (std::size_t i = 0; i < nt; ++i) {
            rows[i].push_back(prob.data.times[i]);
            std::size_t ch = 0;
            for (const auto& c : prob.data.channels) {
                if (!c.use) continue;
                rows[i].push_back(res[ch * nt + i]);
                ++ch;
            }
        }
        save_csv(residual_csv, header, rows);
    }
    return 0;
}

struct OcpRunFlags {
    int scenario = 1;
    int substeps = 0;     // 0: preset default
    int max_iters = 0;
    double horizon_h = 0.0;
    double dt_h = 0.0;
    bool verbose = false;
};

inline void apply_flags(Scenario& sc, const OcpRunFlags& f) {
    if (f.substeps > 0) sc.ocp.substeps = f.substeps;
    if (f.horizon_h > 0.0) sc.ocp.tf = f.horizon_h * 3600.0;
    if (f.dt_h > 0.0) sc.ocp.dt = f.dt_h * 3600.0;
}

inline Json schedule_json(const std::vector<std::vector<double>>& u) {
    Json out = Json::array();
    for (const auto& uk : u) out.push_back(uk);
    return out;
}

inline void export_schedule_csv(const std::string& path, const OcpSpec& spec,
                                const std::vector<std::vector<double>>& u) {
    std::vector<std::string> header = {"time_h", "u_dT_K", "u_dH_g_per_m3", "u_w_ug_per_s",
                                       "u_N_g_per_h"};
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < u.size(); ++k)
        rows.push_back({(spec.t0 + k * spec.dt) / 3600.0, u[k][0], u[k][1], u[k][2], u[k][3]});
    save_csv(path, header, rows);
}

inline int cmd_optimize(const OcpRunFlags& f, const std::string& out_path,
                        const std::string& schedule_csv) {
    Scenario sc = make_scenario(f.scenario);
    apply_flags(sc, f);
    auto nlp = transcribe(sc.ocp, make_partial_dynamics(sc.model, *sc.disturbance));
    SolveOptions so;
    if (f.max_iters > 0) so.max_iters = f.max_iters;
    so.verbose = f.verbose;
    OcpSolution sol = solve(nlp, so);
    const ResourceAccount account =
        account_schedule(sol.u, sc.ocp.dt, sol.x.back(), sc.model.p, sc.supply_flow_m3s);
    emit_json(Json{{"schema_version", kSchemaVersion},
                   {"scenario", f.scenario},
                   {"kind", "optimal"},
                   {"status", sol.status},
                   {"converged", sol.converged},
                   {"iterations", sol.iterations},
                   {"objective", sol.objective},
                   {"terminal_cost", sol.terminal_cost},
                   {"input_cost", sol.input_cost},
                   {"rate_cost", sol.rate_cost},
                   {"max_defect", sol.max_defect},
                   {"account", account_to_json(account)},
                   {"u", schedule_json(sol.u)},
                   {"x_terminal", sol.x.back()}},
              out_path);
    if (!schedule_csv.empty()) export_schedule_csv(schedule_csv, sc.ocp, sol.u);
    return 0;
}

inline int cmd_baseline(const OcpRunFlags& f, const std::string& out_path,
                        const std::string& schedule_csv) {
    Scenario sc = make_scenario(f.scenario);
    apply_flags(sc, f);
    auto nlp = transcribe(sc.ocp, make_partial_dynamics(sc.model, *sc.disturbance));
    BaselineResult base =
        setpoint_baseline(nlp, sc.setpoint, *sc.disturbance, sc.model.p, sc.supply_flow_m3s);
    emit_json(Json{{"schema_version", kSchemaVersion},
                   {"scenario", f.scenario},
                   {"kind", "baseline"},
                   {"objective", base.objective},
                   {"account", account_to_json(base.account)},
                   {"u", schedule_json(base.u)},
                   {"x_terminal", base.x.back()}},
              out_path);
    if (!schedule_csv.empty()) export_schedule_csv(schedule_csv, sc.ocp, base.u);
    return 0;
}

inline int cmd_compare(const std::string& optimal_path, const std::string& baseline_path,
                       const std::string& out_path) {
    const Json a = load_json_file(optimal_path);
    const Json b = load_json_file(baseline_path);
    const ResourceComparison c =
        compare_resources(account_from_json(a.at("account")), account_from_json(b.at("account")));
    auto num = [](double v) { return std::isnan(v) ? Json() : Json(v); };
    emit_json(Json{{"schema_version", kSchemaVersion},
                   {"heating_ratio", num(c.heating_ratio)},
                   {"humidification_ratio", num(c.humidification_ratio)},
                   {"substrate_water_ratio", num(c.substrate_water_ratio)},
                   {"biomass_delta", num(c.biomass_delta)}},
              out_path);
    return 0;
}

}  // namespace detail

/// Entry point of the command-line tool. Exit codes: 0 success, 2 for
/// configuration/usage errors, 3 for numeric failures; errors are reported
/// as a JSON document on stderr.
inline int run_command(int argc, const char* const* argv) {
    CLI::App app{"larvae production simulator, estimator, and optimizer"};
    app.require_subcommand(1);

    std::string config_path, out_path, schedule_csv, residual_csv;
    std::string optimal_path, baseline_path;
    bool with_fluxes = false;
    detail::OcpRunFlags flags;

    auto* sim = app.add_subcommand("simulate", "integrate a configured run and export CSV");
    sim->add_option("--config", config_path)->required();
    sim->add_option("--out", out_path)->required();
    sim->add_flag("--fluxes", with_fluxes, "record the flux report per sample");

    auto* flx = app.add_subcommand("fluxes", "single-point flux report as JSON");
    flx->add_option("--config", config_path)->required();
    flx->add_option("--out", out_path);

    auto* est = app.add_subcommand("estimate", "fit free parameters to a dataset");
    est->add_option("--config", config_path)->required();
    est->add_option("--out", out_path)->required();
    est->add_option("--residuals", residual_csv, "per-channel residual CSV at the optimum");

    auto add_ocp_flags = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", flags.scenario)->check(CLI::Range(1, 3));
        cmd->add_option("--substeps", flags.substeps);
        cmd->add_option("--max-iters", flags.max_iters);
        cmd->add_option("--horizon-h", flags.horizon_h);
        cmd->add_option("--dt-h", flags.dt_h);
        cmd->add_option("--out", out_path)->required();
        cmd->add_option("--schedule", schedule_csv);
    };
    auto* opt = app.add_subcommand("optimize", "solve a built-in optimization scenario");
    add_ocp_flags(opt);
    opt->add_flag("--verbose", flags.verbose);
    auto* bas = app.add_subcommand("baseline", "run the set-point operation for a scenario");
    add_ocp_flags(bas);

    auto* cmp = app.add_subcommand("compare", "resource ratios: optimal vs baseline");
    cmp->add_option("--optimal", optimal_path)->required();
    cmp->add_option("--baseline", baseline_path)->required();
    cmp->add_option("--out", out_path);

    auto fail = [](const std::string& kind, const std::string& msg, int code) {
        const Json err{{"error", Json{{"kind", kind}, {"message", msg}}}};
        std::fputs((err.dump() + "\n").c_str(), stderr);
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        if (sim->parsed()) return detail::cmd_simulate(config_path, out_path, with_fluxes);
        if (flx->parsed()) return detail::cmd_fluxes(config_path, out_path);
        if (est->parsed()) return detail::cmd_estimate(config_path, out_path, residual_csv);
        if (opt->parsed()) return detail::cmd_optimize(flags, out_path, schedule_csv);
        if (bas->parsed()) return detail::cmd_baseline(flags, out_path, schedule_csv);
        if (cmp->parsed()) return detail::cmd_compare(optimal_path, baseline_path, out_path);
    } catch (const ConfigError& e) {
        return fail("config", e.what(), 2);
    } catch (const Json::exception& e) {
        return fail("config", e.what(), 2);
    } catch (const SimulationError& e) {
        return fail("numeric", e.what(), 3);
    } catch (const std::domain_error& e) {
        return fail("numeric", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 3);
    }
    return fail("usage", "no subcommand selected", 2);
}

}  // namespace larvasim::cli
