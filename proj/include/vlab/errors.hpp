#pragma once

#include <stdexcept>
#include <string>

namespace vlab {

/// Malformed configuration or input file. Maps to exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A guarantee the code relies on did not hold. Maps to exit status 3.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// A learner exceeded its declared oracle budget. Maps to exit status 4.
struct BudgetViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void ensure(bool condition, const std::string& what)
{
    if (!condition) throw InvariantViolation(what);
}

} // namespace vlab
