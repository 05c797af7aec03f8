#pragma once

#include <stdexcept>
#include <string>

namespace regcoc {

// Exit-code families used by the command line front end.
enum class ErrorKind {
    input = 1,      // malformed or unreadable input
    contract = 2,   // precondition or invariant breach
    numerical = 3,  // root finding / iteration failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct InputError : Error {
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

struct ContractError : Error {
    explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Tree shape / node lookup problems.
struct InvalidTree : ContractError {
    using ContractError::ContractError;
};

// A query asked for a node later than the payoff it values.
struct TimeOrderError : ContractError {
    using ContractError::ContractError;
};

struct InvalidCashFlow : ContractError {
    using ContractError::ContractError;
};

// Cost of capital is undefined when the present value is zero.
struct ZeroPresentValue : ContractError {
    using ContractError::ContractError;
};

struct ZeroExpectation : ContractError {
    using ContractError::ContractError;
};

struct ZeroVariance : ContractError {
    using ContractError::ContractError;
};

struct ZeroDenominator : ContractError {
    using ContractError::ContractError;
};

struct ZeroRab : ContractError {
    using ContractError::ContractError;
};

struct NonPositiveStatePrice : ContractError {
    using ContractError::ContractError;
};

struct OutOfRange : ContractError {
    using ContractError::ContractError;
};

struct MissingInstrument : ContractError {
    using ContractError::ContractError;
};

struct ZeroPortfolioValue : ContractError {
    using ContractError::ContractError;
};

struct DecompositionMismatch : ContractError {
    using ContractError::ContractError;
};

// Raised when a regulation policy breaks the present-value condition at a reset.
class PolicyViolation : public ContractError {
public:
    PolicyViolation(int period, const std::string& what)
        : ContractError(what), period_(period) {}

    // Reset time (start of the offending regulatory period).
    int period() const noexcept { return period_; }

private:
    int period_;
};

struct NonConvergence : NumericalError {
    using NumericalError::NumericalError;
};

struct NoSolution : NumericalError {
    using NumericalError::NumericalError;
};

struct NoSignChange : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace regcoc
