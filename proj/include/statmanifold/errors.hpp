#pragma once

#include <stdexcept>
#include <string>

namespace statmanifold {

// Parameter vector outside the open parameter box (or its safety margin).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sample point outside the declared support. Distinct from DomainError.
struct SupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Family constructor rejected its spec (divergent normalization,
// dependent statistics, negative mixture density, ...).
struct ConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric or jacobian lost rank.
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite integrand or a hard numerical failure inside the
// expectation engine (budget exhaustion is reported in-band, not thrown).
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Geodesic left the parameter domain.
struct BoundaryError : std::runtime_error {
    double exit_time;
    BoundaryError(const std::string& msg, double t)
        : std::runtime_error(msg), exit_time(t) {}
};

// Monte Carlo experiment could not produce a usable report.
struct ExperimentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace statmanifold
