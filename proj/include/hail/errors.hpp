#pragma once

#include <stdexcept>
#include <string>

namespace hail {

/// Raised when a caller breaks a documented precondition (shape, range, unknown name).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for vectors whose norm is zero where a direction is required.
class ZeroNormError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a numerical routine produces or receives non-finite values,
/// or a factorization that should succeed does not.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by readers of the on-disk formats (bad magic, version, truncation).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractError(what);
}

}  // namespace hail
