#pragma once

#include <cmath>

#include "fastavg/error.hpp"

namespace fastavg {

template <typename Observer>
void run_coupled(const AveragedModel& model, double v0, const NoisePath& noise, Observer&& observer) {
    const double dt = noise.dt();
    double v = v0;
    observer(std::size_t{0}, 0.0, v);
    for (std::size_t n = 0; n < noise.steps(); ++n) {
        const double t = static_cast<double>(n) * dt;
        const auto dW = noise.dW(n);
        const auto dB = noise.dB(n);
        double dv = model.fhat(t, v) * dt;
        dv += model.ghat_dot(t, v, dW);
        const auto s = model.sigmahat(t);
        dv += s[0] * dB[0] + s[1] * dB[1];
        v += dv;
        if (!std::isfinite(v)) throw IntegrationFailure(n, "averaged SDE state is not finite");
        observer(n + 1, static_cast<double>(n + 1) * dt, v);
    }
}

}  // namespace fastavg
