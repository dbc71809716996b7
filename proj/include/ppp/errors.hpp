#ifndef PPP_ERRORS_HPP
#define PPP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ppp {

/// Invalid model primitives or parameters (e.g. lambda < delta).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed configuration file or flag value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A tridiagonal pivot fell below the singularity threshold.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Policy iteration did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, int iterations, double last_change)
        : std::runtime_error(what), iterations_(iterations), last_change_(last_change) {}

    int iterations() const noexcept { return iterations_; }
    double last_change() const noexcept { return last_change_; }

private:
    int iterations_;
    double last_change_;
};

}  // namespace ppp

#endif  // PPP_ERRORS_HPP
