#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tropcap {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the CLI reports for it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
    virtual const char* kind() const noexcept { return "error"; }
};

/// A precondition on the arguments of an operation does not hold
/// (dimension mismatch, k out of range, malformed spec).
class ContractViolation : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "contract_violation"; }
};

/// The request is valid but exceeds a configured budget, or asks for a
/// construction that cannot exist at these dimensions.
class Refusal : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
    const char* kind() const noexcept override { return "refusal"; }
};

/// A checked mathematical property failed on a concrete instance.
class PropertyFailure : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
    const char* kind() const noexcept override { return "property_failure"; }
};

/// The LP kernel lost precision. `constraint_index` names the constraint
/// row involved in the failing pivot, or -1 when no single row is to blame.
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& what, long constraint_index)
        : Error(what), constraint_index_(constraint_index) {}
    int exit_code() const noexcept override { return 4; }
    const char* kind() const noexcept override { return "numerically_ill_conditioned"; }
    long constraint_index() const noexcept { return constraint_index_; }

private:
    long constraint_index_;
};

/// A sampler could not produce any point inside its domain.
class EmptyDomain : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "empty_domain"; }
};

}  // namespace tropcap
