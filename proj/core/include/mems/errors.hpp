#pragma once

#include <stdexcept>
#include <string>

namespace mems {

// Invalid user-facing configuration (bad grid size, parameter out of range).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// A numerical safeguard tripped: non-integrable data, stalled eigensolver, ...
class NumericalGuardError : public std::runtime_error {
public:
    explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

// A branch sweep hit a lambda without a converged minimal solution.
class BranchError : public std::runtime_error {
public:
    BranchError(const std::string& what, double failed_lambda)
        : std::runtime_error(what), failed_lambda_(failed_lambda) {}

    double failed_lambda() const noexcept { return failed_lambda_; }

private:
    double failed_lambda_;
};

}  // namespace mems
