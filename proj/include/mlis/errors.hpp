#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mlis {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid argument (bad sizes, out-of-range knobs, zero step counts).
struct argument_error : error {
    using error::error;
};

/// Vector/matrix dimension mismatch.
struct dimension_error : error {
    using error::error;
};

/// Non-finite values where finite ones are required.
struct numeric_error : error {
    using error::error;
};

/// Covariance target is not positive definite; names the offending parameter.
struct factorization_error : error {
    factorization_error(const std::string& what, std::string parameter)
        : error(what), parameter(std::move(parameter)) {}
    std::string parameter;
};

/// Sample set with no positive weight; the SAA objective is undefined.
struct degenerate_set_error : error {
    using error::error;
};

/// Newton-Raphson ran out of iterations; carries the last iterate.
struct convergence_error : error {
    convergence_error(const std::string& what, std::vector<double> last_iterate,
                      double gradient_norm, int iterations)
        : error(what),
          last_iterate(std::move(last_iterate)),
          gradient_norm(gradient_norm),
          iterations(iterations) {}
    std::vector<double> last_iterate;
    double gradient_norm;
    int iterations;
};

/// Malformed or inconsistent benchmark configuration.
struct config_error : error {
    using error::error;
};

}  // namespace mlis
