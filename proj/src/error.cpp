#include "fastavg/error.hpp"

#include <sstream>

namespace fastavg {

namespace {

std::string ellipticity_message(double x, double value) {
    std::ostringstream os;
    os << "ellipticity violated: a(" << x << ") = " << value << " is not positive";
    return os.str();
}

}  // namespace

EllipticityViolation::EllipticityViolation(double x, double value)
    : Error(ellipticity_message(x, value)), x_(x), value_(value) {}

HypothesisViolation::HypothesisViolation(std::string hypothesis, const std::string& detail)
    : Error(hypothesis + " violated: " + detail), hypothesis_(std::move(hypothesis)) {}

IntegrationFailure::IntegrationFailure(std::size_t step, const std::string& detail)
    : Error("integration failed at step " + std::to_string(step) + ": " + detail), step_(step) {}

}  // namespace fastavg
