#pragma once

#include <span>

namespace fastavg {

/// Least-squares line log(err) = slope * log(eps) + intercept.
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Requires at least two strictly positive pairs.
LogLogFit fit_loglog(std::span<const double> eps, std::span<const double> err);

}  // namespace fastavg
