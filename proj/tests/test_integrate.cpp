#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "larvasim/integrate.hpp"

using namespace larvasim;

namespace {

const RhsFn exp_decay = [](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = -x[0];
};

}  // namespace

TEST_CASE("fixed-step RK4 solves the exponential test problem") {
    auto x = integrate_rk4(exp_decay, {1.0}, 0.0, 1.0, 1e-3);
    CHECK(x[0] == Catch::Approx(std::exp(-1.0)).margin(1e-6));
}

TEST_CASE("zero dynamics stay constant") {
    const RhsFn zero = [](double, std::span<const double>, std::span<double> dx) { dx[0] = 0.0; };
    std::size_t samples = 0;
    auto x = integrate_rk4(zero, {3.14}, 0.0, 10.0, 0.5,
                           [&](double, std::span<const double> xs) {
                               ++samples;
                               CHECK(xs[0] == 3.14);
                           });
    CHECK(x[0] == 3.14);
    CHECK(samples == 21);
}

TEST_CASE("RK4 exhibits fourth-order convergence") {
    std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
    std::vector<double> errs;
    for (double h : hs) {
        auto x = integrate_rk4(exp_decay, {1.0}, 0.0, 1.0, h);
        errs.push_back(std::abs(x[0] - std::exp(-1.0)));
    }
    // least-squares slope on the log-log error plot
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double lx = std::log(hs[i]), ly = std::log(errs[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double n = static_cast<double>(hs.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == Catch::Approx(4.0).margin(0.2));
    // and halving the step cuts the error by roughly 16x
    CHECK(errs[0] / errs[1] == Catch::Approx(16.0).margin(2.0));
}

TEST_CASE("adaptive pair matches the analytic solution at tight tolerance") {
    AdaptiveOptions opt;
    opt.rtol = 1e-9;
    opt.atol = 1e-12;
    auto x = integrate_adaptive(exp_decay, {1.0}, 0.0, 1.0, opt);
    CHECK(x[0] == Catch::Approx(std::exp(-1.0)).margin(1e-8));
}

TEST_CASE("adaptive pair reports step-size underflow on stiff dynamics") {
    const RhsFn stiff = [](double, std::span<const double> x, std::span<double> dx) {
        dx[0] = -1e6 * x[0];
    };
    AdaptiveOptions opt;
    opt.rtol = 1e-6;
    opt.atol = 1e-9;
    opt.h_min = 1e-5;  // floor above the stable step size
    opt.h_init = 0.5;
    CHECK_THROWS_AS(integrate_adaptive(stiff, {1.0}, 0.0, 1.0, opt), StepSizeUnderflow);
}

TEST_CASE("non-finite states abort with a diagnostic") {
    const RhsFn blowup = [](double, std::span<const double> x, std::span<double> dx) {
        dx[0] = x[0] * x[0];
    };
    try {
        integrate_rk4(blowup, {1.0}, 0.0, 10.0, 0.05);
        FAIL("expected SimulationError");
    } catch (const SimulationError& e) {
        CHECK(e.time_s > 0.0);
        CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    }
}

TEST_CASE("steps are clipped at breakpoints") {
    const RhsFn unit = [](double, std::span<const double>, std::span<double> dx) { dx[0] = 1.0; };
    const BreakpointFn brk = [](double t) {
        return t < 1.0 / 3.0 ? 1.0 / 3.0 : kNoBreakpoint;
    };
    std::vector<double> seen;
    auto x = integrate_rk4(unit, {0.0}, 0.0, 1.0, 0.25,
                           [&](double t, std::span<const double>) { seen.push_back(t); }, brk);
    CHECK(x[0] == Catch::Approx(1.0).margin(1e-12));
    // a step boundary lands exactly on the breakpoint
    bool hit = false;
    for (double t : seen) hit = hit || t == Catch::Approx(1.0 / 3.0).margin(1e-12);
    CHECK(hit);
}
