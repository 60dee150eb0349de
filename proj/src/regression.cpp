#include "fastavg/regression.hpp"

#include <cmath>
#include <vector>

#include "fastavg/error.hpp"

namespace fastavg {

LogLogFit fit_loglog(std::span<const double> eps, std::span<const double> err) {
    if (eps.size() != err.size()) throw ConfigError("fit inputs differ in length");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (eps[i] > 0.0 && err[i] > 0.0 && std::isfinite(err[i])) {
            x.push_back(std::log(eps[i]));
            y.push_back(std::log(err[i]));
        }
    }
    if (x.size() < 2) throw ConfigError("log-log fit needs two positive points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("log-log fit needs distinct eps values");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

}  // namespace fastavg
