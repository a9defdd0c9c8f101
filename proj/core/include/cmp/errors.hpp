#ifndef CMP_ERRORS_HPP
#define CMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cmp {

/// Invalid or inconsistent user input (configs, parameter blocks, bad paths).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: eigensolver non-convergence, step-size underflow,
/// non-identifiable fits, branch-tracking loss.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem trouble while reading or writing artifacts.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmp

#endif
