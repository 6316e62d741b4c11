#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "larvasim/cli.hpp"
#include "larvasim/config.hpp"
#include "larvasim/csv.hpp"

using namespace larvasim;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "larvasim_io_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string tmp_file(const std::string& name) { return (tmp_dir() / name).string(); }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv = {"larvasim"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run_command(static_cast<int>(argv.size()), argv.data());
}

const char* kPartialConfig = R"json({
  "schema_version": 1,
  "setup": "partial",
  "larvae": 2000,
  "initial_state": {"B_dry": 4.28e-3, "B_wet": 0.018, "W_med": 1.5, "N_feed": 0.48,
                     "B_med": 2.016, "T_med": 27.0},
  "disturbance": {"constants": {"T_out": 29.0, "H_out": 0.02}},
  "inputs": {"constants": {"u_W_flow": 1.4e-8}},
  "integrator": {"tf_h": 2.0, "dt_s": 36.0, "record_dt_s": 600.0}
})json";

}  // namespace

TEST_CASE("sensor CSV loads the documented shape") {
    const auto path = tmp_file("basic.csv");
    write_file(path, "time_s,T_out,H_out,C_out\n0,20,0.01,7e-4\n60,21,0.011,7.1e-4\n120,22,0.012,7.2e-4\n");
    auto log = load_sensor_csv(path);
    CHECK(log.columns == std::vector<std::string>{"T_out", "H_out", "C_out"});
    CHECK(log.time_s.size() == 3);
    CHECK(log.channel("H_out")[1] == Catch::Approx(0.011));
    CHECK(log.warnings.empty());
}

TEST_CASE("sensor CSV error paths name the offending row") {
    const auto dup = tmp_file("dup.csv");
    write_file(dup, "time_s,T_out\n0,20\n60,21\n60,22\n");
    try {
        load_sensor_csv(dup);
        FAIL("expected duplicate timestamp error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("row 4") != std::string::npos);
    }

    const auto no_time = tmp_file("no_time.csv");
    write_file(no_time, "T_out,H_out\n20,0.01\n");
    CHECK_THROWS_AS(load_sensor_csv(no_time), ConfigError);

    const auto bad_num = tmp_file("bad_num.csv");
    write_file(bad_num, "time_s,T_out\n0,20\n60,oops\n");
    try {
        load_sensor_csv(bad_num);
        FAIL("expected parse error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("T_out") != std::string::npos);
    }

    const auto unknown = tmp_file("unknown.csv");
    write_file(unknown, "time_s,T_out,potato\n0,20,1\n");
    auto log = load_sensor_csv(unknown);
    REQUIRE(log.warnings.size() == 1);
    CHECK(log.warnings[0].find("potato") != std::string::npos);
    CHECK(log.channel("potato")[0] == 1.0);
}

TEST_CASE("CSV round-trips finite doubles bit-exactly") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-12, 12);
    SensorLog log;
    log.columns = {"T_out", "H_out"};
    for (int i = 0; i < 50; ++i) {
        log.time_s.push_back(i * 17.0 + 0.123456789123456789);
        log.rows.push_back({mant(rng) * std::pow(10.0, expo(rng)),
                            mant(rng) * std::pow(10.0, expo(rng))});
    }
    const auto path = tmp_file("roundtrip.csv");
    save_sensor_csv(path, log);
    auto back = load_sensor_csv(path);
    REQUIRE(back.time_s.size() == log.time_s.size());
    for (std::size_t i = 0; i < log.time_s.size(); ++i) {
        CHECK(back.time_s[i] == log.time_s[i]);
        CHECK(back.rows[i][0] == log.rows[i][0]);
        CHECK(back.rows[i][1] == log.rows[i][1]);
    }
}

TEST_CASE("run config parses and validates") {
    auto cfg = parse_run_config(Json::parse(kPartialConfig));
    CHECK(cfg.setup == SetupKind::partial);
    CHECK(cfg.larvae == 2000.0);
    CHECK(cfg.x0[idx::N_feed] == Catch::Approx(0.48));
    CHECK(cfg.sim.tf == Catch::Approx(7200.0));

    SECTION("unknown parameter is rejected") {
        auto j = Json::parse(kPartialConfig);
        j["parameters"] = {{"k_bogus", 1.0}};
        CHECK_THROWS_AS(parse_run_config(j), ConfigError);
    }
    SECTION("state key must belong to the setup") {
        auto j = Json::parse(kPartialConfig);
        j["initial_state"]["T_air"] = 25.0;  // closed-setup state
        CHECK_THROWS_AS(parse_run_config(j), ConfigError);
    }
    SECTION("parameter overrides land in the model") {
        auto j = Json::parse(kPartialConfig);
        j["parameters"] = {{"k_mat", 2.0e-5}};
        auto c = parse_run_config(j);
        CHECK(c.params.k_mat == Catch::Approx(2.0e-5));
    }
    SECTION("events outside the horizon are rejected") {
        auto j = Json::parse(kPartialConfig);
        j["events"] = Json::array({Json{{"kind", "sample"}, {"time_h", 100.0}, {"count", 10}}});
        CHECK_THROWS_AS(parse_run_config(j), ConfigError);
    }
}

TEST_CASE("simulate subcommand writes a loadable trajectory") {
    const auto cfg_path = tmp_file("run.json");
    write_file(cfg_path, kPartialConfig);
    const auto out_path = tmp_file("traj.csv");
    REQUIRE(run_cli({"simulate", "--config", cfg_path, "--out", out_path, "--fluxes"}) == 0);

    auto log = load_sensor_csv(out_path);  // unknown columns kept with warnings
    CHECK(log.time_s.size() == 13);        // 2 h at 10 min stride
    CHECK(log.has("B_dry"));
    CHECK(log.has("phi_W_L_med"));
    CHECK(log.channel("T_med").front() == Catch::Approx(27.0));

    SECTION("byte-identical on a rerun") {
        const auto out2 = tmp_file("traj2.csv");
        REQUIRE(run_cli({"simulate", "--config", cfg_path, "--out", out2, "--fluxes"}) == 0);
        CHECK(read_file(out_path) == read_file(out2));
    }
}

TEST_CASE("fluxes subcommand reports the full key set") {
    const auto cfg_path = tmp_file("run2.json");
    write_file(cfg_path, kPartialConfig);
    const auto out_path = tmp_file("fluxes.json");
    REQUIRE(run_cli({"fluxes", "--config", cfg_path, "--out", out_path}) == 0);
    auto doc = Json::parse(read_file(out_path));
    CHECK(doc.at("schema_version") == 1);
    CHECK(doc.at("fluxes").size() == FluxReport::flux_keys().size());
    for (const auto& k : FluxReport::flux_keys()) CHECK(doc.at("fluxes").contains(k));
    CHECK(doc.at("rates").contains("r_maint"));
}

TEST_CASE("compare subcommand yields unit ratios for identical accounts") {
    const auto acc = Json{{"schema_version", 1},
                          {"account", Json{{"heating_energy_J", 5.0},
                                           {"humidification_water_kg", 0.2},
                                           {"substrate_water_kg", 0.1},
                                           {"terminal_B_dry_g", 0.05},
                                           {"terminal_W_med_kg", 1.0},
                                           {"terminal_N_med_kg", 0.4}}}};
    const auto a = tmp_file("acc_a.json");
    const auto b = tmp_file("acc_b.json");
    write_file(a, acc.dump());
    write_file(b, acc.dump());
    const auto out = tmp_file("cmp.json");
    REQUIRE(run_cli({"compare", "--optimal", a, "--baseline", b, "--out", out}) == 0);
    auto doc = Json::parse(read_file(out));
    CHECK(doc.at("heating_ratio").get<double>() == Catch::Approx(1.0));
    CHECK(doc.at("humidification_ratio").get<double>() == Catch::Approx(1.0));
    CHECK(doc.at("substrate_water_ratio").get<double>() == Catch::Approx(1.0));
    CHECK(doc.at("biomass_delta").get<double>() == Catch::Approx(0.0));
}

TEST_CASE("config failures exit with code 2, numeric failures with 3") {
    CHECK(run_cli({"simulate", "--config", tmp_file("missing.json"),
                   "--out", tmp_file("x.csv")}) == 2);

    const auto bad = tmp_file("bad.json");
    write_file(bad, "{ not json");
    CHECK(run_cli({"simulate", "--config", bad, "--out", tmp_file("x.csv")}) == 2);

    // oversampling event triggers a numeric failure during the run
    auto j = Json::parse(kPartialConfig);
    j["events"] = Json::array({Json{{"kind", "sample"}, {"time_h", 1.0}, {"count", 5000}}});
    const auto cfg_path = tmp_file("oversample.json");
    write_file(cfg_path, j.dump());
    CHECK(run_cli({"simulate", "--config", cfg_path, "--out", tmp_file("y.csv")}) == 3);

    CHECK(run_cli({"bogus-subcommand"}) == 2);
}

TEST_CASE("config directory environment variable resolves bare names") {
    const auto cfg_path = tmp_file("envrun.json");
    write_file(cfg_path, kPartialConfig);
    setenv("LARVASIM_CONFIG_DIR", tmp_dir().string().c_str(), 1);
    auto cfg = load_run_config("envrun.json");
    CHECK(cfg.larvae == 2000.0);
    unsetenv("LARVASIM_CONFIG_DIR");
    CHECK_THROWS_AS(load_run_config("envrun.json"), ConfigError);
}
