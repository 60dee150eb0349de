#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fastavg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, violated precondition, unknown family.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The diffusion coefficient a(x) is not bounded away from zero.
class EllipticityViolation : public Error {
public:
    EllipticityViolation(double x, double value);
    double x() const noexcept { return x_; }
    double value() const noexcept { return value_; }

private:
    double x_;
    double value_;
};

/// A model hypothesis (H1..H4) does not hold; `hypothesis()` names it, e.g. "H4(2)".
class HypothesisViolation : public Error {
public:
    HypothesisViolation(std::string hypothesis, const std::string& detail);
    const std::string& hypothesis() const noexcept { return hypothesis_; }

private:
    std::string hypothesis_;
};

/// Linear algebra or quadrature failed (singular system, eigensolver breakdown,
/// unresolvable density).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A time integrator produced a non-finite state.
class IntegrationFailure : public Error {
public:
    IntegrationFailure(std::size_t step, const std::string& detail);
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace fastavg
