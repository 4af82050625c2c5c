// errors.hpp — exception taxonomy shared by the solvers and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace crossqed {

// Bad user input: parameters, configs, unsupported parameter regimes.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An integrator or invariant check failed mid-run.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A discretization did not converge (grid too short, bins too coarse, ...).
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace crossqed
