#pragma once

#include <stdexcept>
#include <string>

namespace garchpd {

// Bad arguments: outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A truncation, quadrature or iteration did not reach its tolerance.
// `estimate` carries the best value available when it gave up.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what, double estimate = 0.0)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

// Configured size limits (horizon cap, memory budget).
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input documents (parameter files, cached tables).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace garchpd
