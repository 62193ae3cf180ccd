#pragma once

#include <stdexcept>
#include <string>

namespace seqimp {

/// Invalid user configuration. `key()` names the offending `section.key`.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A 2x2 matrix or scalar denominator vanished. Carries the evaluation point
/// as angular frequency (imaginary part of s) so sweeps can report it.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, double omega)
        : std::runtime_error(what + " at omega=" + std::to_string(omega) + " rad/s"), omega_(omega) {}

    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InfeasibleOperatingPoint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation point lies on the locus; refine the grid or perturb the parameters.
class MarginalCaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrackingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SearchDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace seqimp
