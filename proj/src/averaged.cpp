#include "fastavg/averaged.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastavg/error.hpp"
#include "fastavg/neumann.hpp"

namespace fastavg {

namespace {

// Linear interpolation of measure.density at x.
double density_at(const InvariantMeasure& measure, double x) {
    const auto& g = measure.grid;
    const double s = (x - g.x_a()) / g.h();
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, double(g.n() - 1)));
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * measure.density[i] + w * measure.density[i + 1];
}

std::vector<AffineSplit> splits_or_throw(const Field& field, const char* name) {
    auto splits = field.affine_splits();
    if (!splits) throw HypothesisViolation("H2(1)", std::string(name) + " is not affine in u");
    return *splits;
}

}  // namespace

AveragedModel::AveragedModel(const ModelSpec& model, const SpectralBasis& basis,
                             const InvariantMeasure& measure, const EllipticOperator1D& op,
                             const NoiseSpec& noise)
    : model_(model), measure_(measure), op_(op) {
    validate(model_, Purpose::simulate, 1.0).require();
    noise.check();
    const auto& mg = measure_.grid;
    for (const auto& split : splits_or_throw(model_.f, "f")) {
        std::vector<double> sm(mg.nodes());
        for (std::size_t i = 0; i < sm.size(); ++i) sm[i] = split.space(mg.x(i)) * measure_.density[i];
        f_terms_.push_back({split, {mg.integrate(sm)}});
    }

    const auto& bg = basis.grid();
    modes_ = std::min(basis.modes(), noise.modes);
    std::vector<double> m(bg.nodes());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = bg == mg ? measure_.density[i] : density_at(measure_, bg.x(i));
    for (const auto& split : splits_or_throw(model_.g, "g")) {
        std::vector<double> gm(bg.nodes());
        for (std::size_t i = 0; i < gm.size(); ++i) gm[i] = split.space(bg.x(i)) * m[i];
        auto space = basis.project(gm);
        space.resize(modes_);
        g_terms_.push_back({split, std::move(space)});
    }

    lambda2_.resize(modes_);
    for (std::size_t j = 0; j < lambda2_.size(); ++j) lambda2_[j] = noise.lambda(j) * noise.lambda(j);
    theta2_ = {noise.theta[0] * noise.theta[0], noise.theta[1] * noise.theta[1]};
    // delta <N_delta h, mu> = h_a m(x_a) + h_b m(x_b) for every delta > 0.
    sigma_weight_ = {measure_.density.front(), measure_.density.back()};
}

double AveragedModel::fhat(double t, double v) const {
    double acc = 0.0;
    for (const auto& term : f_terms_) acc += term.scale(t, v) * term.space[0];
    return acc;
}

std::vector<double> AveragedModel::ghat(double t, double v) const {
    std::vector<double> out(modes_, 0.0);
    for (const auto& term : g_terms_) {
        const double s = term.scale(t, v);
        for (std::size_t j = 0; j < modes_; ++j) out[j] += s * term.space[j];
    }
    return out;
}

double AveragedModel::ghat(double t, double v, std::size_t j) const {
    if (j >= modes_) throw ConfigError("noise mode index out of range");
    double acc = 0.0;
    for (const auto& term : g_terms_) acc += term.scale(t, v) * term.space[j];
    return acc;
}

double AveragedModel::ghat_dot(double t, double v, std::span<const double> dW) const {
    const std::size_t K = std::min(modes_, dW.size());
    double total = 0.0;
    for (const auto& term : g_terms_) {
        const double s = term.scale(t, v);
        if (s == 0.0) continue;
        double acc = 0.0;
        for (std::size_t j = 0; j < K; ++j) acc += term.space[j] * dW[j];
        total += s * acc;
    }
    return total;
}

std::array<double, 2> AveragedModel::sigmahat(double t) const {
    return {model_.sigma.eval(t, op_.x_a(), 0.0) * sigma_weight_[0],
            model_.sigma.eval(t, op_.x_b(), 0.0) * sigma_weight_[1]};
}

std::array<double, 2> AveragedModel::sigmahat_quadrature(double t) const {
    std::array<double, 2> out{};
    for (std::size_t i = 0; i < 2; ++i) {
        BoundaryData h{0.0, 0.0};
        h[i] = model_.sigma.eval(t, i == 0 ? op_.x_a() : op_.x_b(), 0.0);
        const auto sol = solve_neumann(op_, kDelta0, h, measure_.grid.n(), NeumannBranch::numeric);
        out[i] = kDelta0 * measure_.mean(sol.values);
    }
    return out;
}

double AveragedModel::phi(double t, double v) const {
    const auto g = ghat(t, v);
    double acc = 0.0;
    for (std::size_t j = 0; j < modes_; ++j) acc += lambda2_[j] * g[j] * g[j];
    const auto sh = sigmahat(t);
    acc += theta2_[0] * sh[0] * sh[0] + theta2_[1] * sh[1] * sh[1];
    return std::sqrt(acc);
}

double AveragedModel::initial_value(std::span<const double> u0_grid) const {
    if (u0_grid.size() != measure_.grid.nodes())
        throw ConfigError("initial condition does not match the measure grid");
    return measure_.mean(u0_grid);
}

double AveragedModel::initial_value(const Field& u0) const {
    const auto& g = measure_.grid;
    std::vector<double> values(g.nodes());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = u0.eval(0.0, g.x(i), 0.0);
    return measure_.mean(values);
}

ScalarPath integrate_coupled(const AveragedModel& model, double v0, const NoisePath& noise) {
    ScalarPath path;
    path.times.reserve(noise.steps() + 1);
    path.values.reserve(noise.steps() + 1);
    run_coupled(model, v0, noise, [&](std::size_t, double t, double v) {
        path.times.push_back(t);
        path.values.push_back(v);
    });
    return path;
}

ScalarPath integrate_law(const AveragedModel& model, double v0, double dt,
                         std::span<const double> dbeta) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    ScalarPath path;
    path.times.reserve(dbeta.size() + 1);
    path.values.reserve(dbeta.size() + 1);
    double v = v0;
    path.times.push_back(0.0);
    path.values.push_back(v);
    for (std::size_t n = 0; n < dbeta.size(); ++n) {
        const double t = static_cast<double>(n) * dt;
        v += model.fhat(t, v) * dt + model.phi(t, v) * dbeta[n];
        if (!std::isfinite(v)) throw IntegrationFailure(n, "averaged SDE state is not finite");
        path.times.push_back(static_cast<double>(n + 1) * dt);
        path.values.push_back(v);
    }
    return path;
}

}  // namespace fastavg
