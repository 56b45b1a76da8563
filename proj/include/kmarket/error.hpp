#pragma once

#include <stdexcept>
#include <string>

namespace kmarket {

/// Recoverable pipeline failure with a machine-readable kind
/// ("input-not-found", "no-events", "degenerate-target", ...).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Precondition breach by the caller (arity mismatch, negative input, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const char* what) {
    if (!condition) throw ContractViolation(what);
}

}  // namespace kmarket
