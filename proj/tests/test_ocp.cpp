#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "larvasim/ocp.hpp"
#include "larvasim/scenarios.hpp"

using namespace larvasim;

namespace {

const OcpDynamics single_integrator = [](double, std::span<const double>,
                                         std::span<const double> u, std::span<double> dx) {
    dx[0] = u[0];
};

const OcpDynamics double_integrator = [](double, std::span<const double> x,
                                         std::span<const double> u, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = u[0];
};

OcpSpec toy_spec_1d() {
    OcpSpec s;
    s.t0 = 0.0;
    s.tf = 1.0;
    s.dt = 0.1;
    s.substeps = 5;
    s.x0 = {0.0};
    s.R = {1.0};
    s.S = {0.0};
    s.u_lo = {-10.0};
    s.u_hi = {10.0};
    s.objective_time_unit = 1.0;
    return s;
}

}  // namespace

TEST_CASE("transcription validates the grid and bounds") {
    auto s = toy_spec_1d();
    CHECK(transcribe(s, single_integrator).N == 10);

    SECTION("paper-scale horizon has 192 intervals") {
        OcpSpec h;
        h.t0 = 0.0;
        h.tf = 192.0 * 3600.0;
        h.dt = 3600.0;
        h.x0 = {0.0};
        h.u_lo = {0.0};
        h.u_hi = {1.0};
        CHECK(transcribe(h, single_integrator).N == 192);
    }
    SECTION("interval must divide the horizon") {
        s.dt = 0.3;
        CHECK_THROWS_AS(transcribe(s, single_integrator), ConfigError);
    }
    SECTION("crossed bounds are rejected") {
        s.u_lo = {1.0};
        s.u_hi = {-1.0};
        CHECK_THROWS_AS(transcribe(s, single_integrator), ConfigError);
    }
}

TEST_CASE("defects vanish on a forward-simulated schedule") {
    auto nlp = transcribe(toy_spec_1d(), single_integrator);
    std::vector<std::vector<double>> u(10, {0.7});
    auto xs = rollout(nlp, u);
    for (int k = 0; k < nlp.N; ++k) {
        auto f = nlp.propagate(k, xs[k], u[k]);
        CHECK(std::abs(xs[k + 1][0] - f[0]) < 1e-15);
    }
}

TEST_CASE("minimum-energy transfer with fixed endpoint is constant input") {
    auto s = toy_spec_1d();
    s.xN_lo = {1.0};
    s.xN_hi = {1.0};
    auto nlp = transcribe(s, single_integrator);
    auto sol = solve(nlp);
    REQUIRE(sol.converged);
    for (const auto& uk : sol.u) CHECK(uk[0] == Catch::Approx(1.0).margin(1e-6));
    CHECK(sol.x.back()[0] == Catch::Approx(1.0).margin(1e-8));
    CHECK(sol.objective == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("double-integrator minimum energy matches the closed-form discrete optimum") {
    const int N = 20;
    const double T = 1.0, dt = T / N;
    OcpSpec s;
    s.t0 = 0.0;
    s.tf = T;
    s.dt = dt;
    s.substeps = 4;
    s.x0 = {0.0, 0.0};
    s.R = {1.0};
    s.S = {0.0};
    s.u_lo = {-100.0};
    s.u_hi = {100.0};
    s.xN_lo = {1.0, 0.0};
    s.xN_hi = {1.0, 0.0};
    s.objective_time_unit = 1.0;
    auto nlp = transcribe(s, double_integrator);
    auto sol = solve(nlp);
    REQUIRE(sol.converged);

    // closed form: u* = m1*c1 + m2*c2 with c1_k = dt^2 (N-k-1/2), c2_k = dt,
    // from minimizing sum u^2 under the two terminal equality constraints
    std::vector<double> c1(N), c2(N);
    for (int k = 0; k < N; ++k) {
        c1[k] = dt * dt * (N - k - 0.5);
        c2[k] = dt;
    }
    double a11 = 0, a12 = 0, a22 = 0;
    for (int k = 0; k < N; ++k) {
        a11 += c1[k] * c1[k];
        a12 += c1[k] * c2[k];
        a22 += c2[k] * c2[k];
    }
    const double det = a11 * a22 - a12 * a12;
    const double m1 = a22 / det, m2 = -a12 / det;  // solves [a][m] = [1, 0]
    for (int k = 0; k < N; ++k) {
        const double u_star = m1 * c1[k] + m2 * c2[k];
        CHECK(sol.u[k][0] == Catch::Approx(u_star).margin(1e-4));
    }
    CHECK(sol.x.back()[0] == Catch::Approx(1.0).margin(1e-6));
    CHECK(sol.x.back()[1] == Catch::Approx(0.0).margin(1e-6));

    SECTION("re-simulation reproduces the shooting nodes") {
        auto xs = rollout(nlp, sol.u);
        for (int k = 0; k <= nlp.N; ++k)
            for (int i = 0; i < nlp.nx; ++i)
                CHECK(xs[k][i] == Catch::Approx(sol.x[k][i]).margin(1e-7));
    }
}

TEST_CASE("tightening an input bound never improves the optimum") {
    auto base = toy_spec_1d();
    base.terminal_weight = {-1.0};  // reward terminal state
    base.R = {0.01};
    base.u_lo = {0.0};
    double prev = -1e300;
    for (double cap : {3.0, 2.0, 1.0}) {
        auto s = base;
        s.u_hi = {cap};
        auto sol = solve(transcribe(s, single_integrator));
        REQUIRE(sol.converged);
        CHECK(sol.objective >= prev - 1e-9);
        prev = sol.objective;
    }
}

TEST_CASE("input rate bounds limit consecutive changes") {
    auto s = toy_spec_1d();
    s.terminal_weight = {-1.0};
    s.R = {0.0001};
    s.u_lo = {0.0};
    s.u_hi = {5.0};
    s.du_lo = {-1.0};
    s.du_hi = {1.0};
    s.u_init = {0.0};
    auto sol = solve(transcribe(s, single_integrator));
    REQUIRE(sol.converged);
    double prev = 0.0;
    for (const auto& uk : sol.u) {
        CHECK(uk[0] - prev <= 1.0 / 10.0 + 1e-6);  // dt = 0.1 time units
        prev = uk[0];
    }
}

TEST_CASE("growth weight sweep never reduces terminal dry mass") {
    auto model = ReactorModel::make(SetupKind::partial, Params{}, 2000.0,
                                    ModelOptions{.maturity_smoothing_h = 1.0});
    auto dist = synthetic_climate();
    OcpSpec o;
    o.t0 = 0.0;
    o.tf = 48.0 * 3600.0;
    o.dt = 4.0 * 3600.0;
    o.substeps = 50;
    o.x0 = growth_trial_initial_state();
    o.R = {0.01, 0.001, 0.001, 1000.0};
    o.S = {0.01, 0.01, 0.01, 0.01};
    o.u_lo = {0.0, 0.0, 0.0, 0.0};
    o.u_hi = {15.0, 20.0, 100.0, 0.0};
    o.x_scale = {0.05, 0.2, 300.0, 1.5, 0.5, 0.3, 2.5, 40.0};
    o.u_scale = {15.0, 20.0, 100.0, 1.0};
    o.u_init = {0.0, 0.0, 0.0, 0.0};

    double prev_bdry = -1.0;
    for (double alpha1 : {0.1, 10.0, 1000.0}) {
        o.terminal_weight.assign(kMediumStateDim, 0.0);
        o.terminal_weight[idx::B_dry] = -alpha1 * 1e3;
        auto nlp = transcribe(o, make_partial_dynamics(model, *dist));
        auto sol = solve(nlp);
        const double bdry = sol.x.back()[idx::B_dry];
        CHECK(bdry >= prev_bdry - 1e-9);
        prev_bdry = bdry;
    }
}

TEST_CASE("set-point baseline tracks the set points exactly") {
    auto model = ReactorModel::make(SetupKind::partial, Params{}, 2000.0);
    ConstantDisturbance flat(Disturbance{33.0, 0.012, 7.3e-4, 0.273});
    OcpSpec o = make_scenario(1).ocp;
    o.tf = 24.0 * 3600.0;
    o.substeps = 50;
    auto nlp = transcribe(o, make_partial_dynamics(model, flat));
    SetpointSpec sp;
    sp.T_set_c = 33.0;
    sp.H_set_kgm3 = 0.018;
    sp.u_w_ugps = 14.0;
    auto base = setpoint_baseline(nlp, sp, flat, model.p, 2.5e-4);
    for (const auto& uk : base.u) {
        CHECK(uk[0] == 0.0);  // T_out equals the set point
        CHECK(uk[1] == Catch::Approx((0.018 - 0.012) * 1e3));
        CHECK(uk[2] == Catch::Approx(14.0));
    }
    CHECK(base.account.substrate_water_kg ==
          Catch::Approx(14e-9 * 24.0 * 3600.0).epsilon(1e-12));
}

TEST_CASE("scenario presets encode the published table") {
    auto s1 = make_scenario(1);
    CHECK(s1.ocp.intervals() == 192);
    CHECK(s1.ocp.R == std::vector<double>{0.01, 0.001, 0.001, 1000.0});
    CHECK(s1.ocp.S == std::vector<double>{0.01, 0.01, 0.01, 0.01});
    CHECK(s1.setpoint.T_set_c == 33.0);
    CHECK(s1.setpoint.H_set_kgm3 == Catch::Approx(0.6 * h_sat(33.0)));
    CHECK(s1.setpoint.u_w_ugps == 14.0);

    auto s2 = make_scenario(2);
    CHECK(s2.ocp.R[2] == 0.01);
    CHECK(s2.disturbance->at(0.0).T_out == Catch::Approx(s1.disturbance->at(0.0).T_out - 8.0));

    auto s3 = make_scenario(3);
    CHECK(s3.ocp.u_hi[1] == 0.0);
    CHECK_FALSE(s3.setpoint.humidifier_enabled);
    CHECK(s3.setpoint.u_w_ugps == 28.0);
}

TEST_CASE("resource comparison handles identical and empty accounts") {
    ResourceAccount a;
    a.heating_energy_J = 100.0;
    a.humidification_water_kg = 2.0;
    a.substrate_water_kg = 0.5;
    a.terminal_B_dry_g = 0.05;
    auto c = compare_resources(a, a);
    CHECK(c.heating_ratio == Catch::Approx(1.0));
    CHECK(c.humidification_ratio == Catch::Approx(1.0));
    CHECK(c.substrate_water_ratio == Catch::Approx(1.0));
    CHECK(c.biomass_delta == Catch::Approx(0.0));

    ResourceAccount zero;
    auto cz = compare_resources(a, zero);
    CHECK(std::isnan(cz.heating_ratio));
    CHECK(std::isnan(cz.biomass_delta));
}
