#pragma once

#include <stdexcept>
#include <string>

namespace incompat {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated a documented precondition (bad range, invalid
/// distribution, malformed input object).
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Operands with incompatible dimensions.
class DimensionMismatch : public InvalidArgument {
public:
    explicit DimensionMismatch(const std::string& what) : InvalidArgument(what) {}
};

/// An iterative numerical routine gave up; carries the residual left when the
/// iteration cap was reached.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A representable but intentionally unimplemented feature was requested.
class UnsupportedFeature : public Error {
public:
    explicit UnsupportedFeature(const std::string& what) : Error(what) {}
};

/// Scenario / configuration file problems (parse errors, schema violations,
/// out-of-range references).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace incompat
