#pragma once

#include <stdexcept>
#include <string>

namespace pmt {

// Caller violated a documented precondition.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mathematically undefined input (zero inverse, lambda too small for a formula).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Parameters are self-consistent but cannot be realized (field too small, ...).
struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exhaustive routine refused an instance that is too large to enumerate.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scheme's connectivity precondition does not hold for the setting.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Derived secret lengths came out non-positive.
struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal invariant broken by protocol code; never expected at runtime.
struct ProtocolBug : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace pmt
