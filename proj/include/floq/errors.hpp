#pragma once

#include <stdexcept>
#include <vector>

namespace floq {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EllipticityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : std::runtime_error(what), residual_trace(std::move(residuals)) {}
    std::vector<double> residual_trace;
};

}  // namespace floq
