#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace larvasim {

/// Raised when a simulated state becomes non-finite or physically degenerate
/// (e.g. a non-positive heat capacity). Carries the time and state snapshot
/// at the point of failure.
class SimulationError : public std::runtime_error {
public:
    SimulationError(std::string msg, double time, std::vector<double> state = {})
        : std::runtime_error(std::move(msg)), time_s(time), state(std::move(state)) {}

    double time_s = 0.0;
    std::vector<double> state;
};

/// Raised by the adaptive integrator when step control drives the step size
/// below the configured floor (typically a stiffness symptom for an explicit
/// pair).
class StepSizeUnderflow : public SimulationError {
public:
    using SimulationError::SimulationError;
};

/// Configuration or dataset validation failure. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace larvasim
