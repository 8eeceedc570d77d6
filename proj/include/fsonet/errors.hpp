#pragma once

#include <stdexcept>
#include <string>

namespace fsonet {

/// Argument outside the mathematical domain of a function or model.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Adaptive quadrature (or another iterative method) exhausted its budget
/// without reaching the requested tolerance.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double estimate, double error_estimate)
        : std::runtime_error(what), estimate_(estimate), error_(error_estimate) {}

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

/// Scenario configuration rejected during validation. Carries the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Outage curve flattens out before the fit window; no diversity slope exists.
class InsufficientDecayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) throw DomainError(message);
}

}  // namespace detail
}  // namespace fsonet
