#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "larvasim/psychrometrics.hpp"
#include "larvasim/simulate.hpp"

using namespace larvasim;

namespace {

std::vector<double> tg2_initial_partial() {
    // 2000 larvae of 4.28 mg dry mass, 0.48 kg feed, 1.5 kg water
    std::vector<double> x(kMediumStateDim, 0.0);
    x[idx::B_dry] = 4.28e-3;
    x[idx::B_wet] = 0.018;
    x[idx::W_med] = 1.5;
    x[idx::N_feed] = 0.48;
    x[idx::B_med] = 1.98 + 2000.0 * 1e-3 * 0.018;
    x[idx::T_med] = 27.0;
    return x;
}

}  // namespace

TEST_CASE("an empty schedule reproduces the plain trajectory") {
    auto m = ReactorModel::make(SetupKind::partial, Params{}, 2000.0);
    ConstantInputs u;
    ConstantDisturbance d(Disturbance{29.0, 0.02, 7.3e-4, 0.273});
    SimOptions opt;
    opt.tf = 6.0 * 3600.0;
    opt.dt = 36.0;
    opt.record_dt = 600.0;
    auto a = simulate(m, tg2_initial_partial(), u, d, {}, opt);
    auto b = simulate(m, tg2_initial_partial(), u, d, EventSchedule{}, opt);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t c = 0; c < kMediumStateDim; ++c) CHECK(a.x[i][c] == b.x[i][c]);
}

TEST_CASE("sampling events remove larvae and their wet mass") {
    auto m = ReactorModel::make(SetupKind::partial, Params{}, 2000.0);
    ConstantInputs u;
    ConstantDisturbance d(Disturbance{29.0, 0.02, 7.3e-4, 0.273});
    EventSchedule sched;
    Event e;
    e.kind = Event::Kind::sample;
    e.time_s = 3600.0;
    e.count = 90.0;
    sched.events.push_back(e);

    SimOptions opt;
    opt.tf = 2.0 * 3600.0;
    opt.dt = 36.0;
    opt.record_dt = 300.0;
    auto traj = simulate(m, tg2_initial_partial(), u, d, sched, opt);

    CHECK(traj.larvae.front() == 2000.0);
    CHECK(traj.larvae.back() == 1910.0);

    // the sample recorded at the event time carries the post-event state:
    // exactly the pre-event state minus the removed wet mass
    SimOptions head_opt = opt;
    head_opt.tf = 3600.0;
    auto head = simulate(m, tg2_initial_partial(), u, d, {}, head_opt);
    const double b_wet = head.x.back()[idx::B_wet];
    const double expected = head.x.back()[idx::B_med] - 90.0 * 1e-3 * b_wet;
    CHECK(traj.interp("B_med", 3600.0) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("oversampling is an error") {
    auto m = ReactorModel::make(SetupKind::partial, Params{}, 50.0);
    ConstantInputs u;
    ConstantDisturbance d;
    EventSchedule sched;
    Event e;
    e.kind = Event::Kind::sample;
    e.time_s = 60.0;
    e.count = 90.0;
    sched.events.push_back(e);
    SimOptions opt;
    opt.tf = 120.0;
    opt.dt = 3.6;
    CHECK_THROWS_AS(simulate(m, tg2_initial_partial(), u, d, sched, opt), SimulationError);
}

TEST_CASE("event application commutes with trajectory splitting") {
    auto m = ReactorModel::make(SetupKind::partial, Params{}, 2000.0);
    ConstantInputs u;
    ConstantDisturbance d(Disturbance{29.0, 0.02, 7.3e-4, 0.273});
    const double te = 3.0 * 3600.0, tf = 6.0 * 3600.0;

    EventSchedule sched;
    Event e;
    e.kind = Event::Kind::sample;
    e.time_s = te;
    e.count = 90.0;
    sched.events.push_back(e);

    SimOptions opt;
    opt.tf = tf;
    opt.dt = 36.0;
    opt.record_dt = 600.0;
    auto whole = simulate(m, tg2_initial_partial(), u, d, sched, opt);

    SimOptions first = opt;
    first.tf = te;
    auto head = simulate(m, tg2_initial_partial(), u, d, {}, first);
    std::vector<double> x_mid = head.x.back();
    double larvae = 2000.0 - 90.0;
    x_mid[idx::B_med] -= 1e-3 * 90.0 * x_mid[idx::B_wet];
    auto m2 = m;
    m2.L_num = larvae;
    SimOptions second = opt;
    second.t0 = te;
    second.tf = tf;
    auto tail = simulate(m2, x_mid, u, d, {}, second);

    for (std::size_t c = 0; c < kMediumStateDim; ++c)
        CHECK(whole.x.back()[c] == Catch::Approx(tail.x.back()[c]).margin(1e-14).epsilon(1e-12));
}

TEST_CASE("door events pull the closed-setup air toward the outside") {
    Params p;
    auto m = ReactorModel::make(SetupKind::closed, p, 0.0);
    std::vector<double> x0(kClosedStateDim, 0.0);
    x0[idx::W_med] = 1.0;
    x0[idx::N_feed] = 0.3;
    x0[idx::B_med] = 1.3;
    x0[idx::T_med] = 29.0;
    x0[idx::T_air] = 29.0;
    x0[idx::H_air] = 0.02;
    x0[idx::C_air] = 7.3e-4;
    x0[idx::O_air] = 0.273;
    x0[idx::T_chm] = 29.0;
    x0[idx::T_hx] = 29.0;

    Disturbance cold{15.0, 0.005, 7.3e-4, 0.273};
    ConstantDisturbance d(cold);
    ConstantInputs u;

    EventSchedule sched;
    Event e;
    e.kind = Event::Kind::door;
    e.time_s = 600.0;
    e.duration_s = 300.0;
    sched.events.push_back(e);

    SimOptions opt;
    opt.tf = 1200.0;
    opt.dt = 3.6;
    opt.record_dt = 60.0;
    auto traj = simulate(m, x0, u, d, sched, opt);
    auto plain = simulate(m, x0, u, d, {}, opt);

    const double t_air_door = traj.interp("T_air", 900.0);
    const double t_air_plain = plain.interp("T_air", 900.0);
    CHECK(t_air_door < t_air_plain);  // transient dip while the door is open
    const double h_door = traj.interp("H_air", 900.0);
    const double h_plain = plain.interp("H_air", 900.0);
    CHECK(h_door < h_plain);
}

TEST_CASE("trajectory states respect basic physical invariants") {
    auto m = ReactorModel::make(SetupKind::partial, Params{}, 2000.0);
    ConstantInputs u;
    ConstantDisturbance d(Disturbance{29.0, 0.02, 7.3e-4, 0.273});
    SimOptions opt;
    opt.tf = 48.0 * 3600.0;
    opt.dt = 36.0;
    opt.record_dt = 1800.0;
    auto traj = simulate(m, tg2_initial_partial(), u, d, {}, opt);
    double prev_sigma = -1.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(traj.x[i][idx::W_med] >= -1e-9);
        CHECK(traj.x[i][idx::N_feed] >= -1e-9);
        CHECK(traj.x[i][idx::B_dry] >= 0.0);
        CHECK(traj.x[i][idx::T_sigma] >= prev_sigma - 1e-12);
        prev_sigma = traj.x[i][idx::T_sigma];
        CHECK(traj.x[i][idx::B_wet] >= traj.x[i][idx::B_dry]);
    }
}
