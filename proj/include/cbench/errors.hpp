#pragma once

#include <stdexcept>
#include <string>

namespace cbench {

// Bad input values: invalid shapes, empty lexicons, out-of-range parameters.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A precondition the caller must uphold was violated.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// A combinatorial search would exceed its configured budget. Raised instead
// of silently truncating results.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file content; the message names the offending line when known.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Authentication failure. Never carries the token value.
struct CredentialError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cbench
