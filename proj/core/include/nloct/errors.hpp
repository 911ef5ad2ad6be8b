#pragma once

#include <stdexcept>
#include <string>

namespace nloct {

/// Invalid argument or malformed input (CLI exit code 2).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input outside a model's stated validity range (CLI exit code 2).
class RangeError : public ValidationError {
public:
    explicit RangeError(const std::string& msg) : ValidationError(msg) {}
};

/// No phase-matched solution in the search window (CLI exit code 3).
/// Carries the mismatch values at the usable window edges for diagnostics.
class NoSolutionError : public std::runtime_error {
public:
    NoSolutionError(const std::string& msg, double dk_low, double dk_high)
        : std::runtime_error(msg), delta_k_low(dk_low), delta_k_high(dk_high) {}
    double delta_k_low;
    double delta_k_high;
};

/// Analysis geometry does not match the detected peaks (CLI exit code 3).
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File read/write/parse failure (CLI exit code 4).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Fringe fit did not converge within the iteration budget.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& msg, double residual)
        : std::runtime_error(msg), final_residual(residual) {}
    double final_residual;
};

}  // namespace nloct
