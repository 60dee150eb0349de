#include "fastavg/fd.hpp"

#include <cmath>

#include "fastavg/error.hpp"
#include "flux_operator.hpp"

namespace fastavg {

std::size_t FdConfig::steps() const {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("dt and horizon must be positive");
    const double ratio = horizon / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
        throw ConfigError("horizon must be an integer multiple of dt");
    return n;
}

FdSolver::FdSolver(const EllipticOperator1D& op, ModelSpec model, FdConfig config)
    : op_(op), model_(std::move(model)), config_(config),
      grid_(op.x_a(), op.x_b(), config.grid_n) {
    if (config_.grid_n < 2) throw ConfigError("grid needs at least two intervals");
    if (!(config_.theta >= 0.5 && config_.theta <= 1.0))
        throw ConfigError("theta must lie in [0.5, 1]");
    if (!(config_.eps > 0.0)) throw ConfigError("eps must be positive");
    if (config_.record_every == 0) throw ConfigError("record_every must be positive");
    config_.steps();
    validate(model_, Purpose::simulate, config_.horizon).require();
    op_.check_ellipticity(grid_);
    auto S = detail::assemble_flux_operator(op_, grid_);
    lower_ = std::move(S.lower);
    diag_ = std::move(S.diag);
    upper_ = std::move(S.upper);
    weights_ = std::move(S.weights);
}

GridTrajectory FdSolver::integrate(std::span<const double> u0, const NoisePath& noise,
                                   const SpectralBasis& noise_basis) const {
    if (!op_.divergence_form())
        throw ConfigError("stochastic finite-difference runs need b = 0");
    if (!(noise_basis.grid() == grid_))
        throw ConfigError("noise basis must be sampled on the solver grid");
    if (noise.modes() != noise_basis.modes())
        throw ConfigError("noise path modes do not match the noise basis");
    if (noise.steps() < config_.steps() || std::abs(noise.dt() - config_.dt) > 1e-12 * config_.dt)
        throw ConfigError("noise path does not cover the horizon at this dt");
    return run(u0, nullptr, &noise, &noise_basis);
}

GridTrajectory FdSolver::integrate(std::span<const double> u0, const FluxFunction& flux) const {
    return run(u0, &flux, nullptr, nullptr);
}

GridTrajectory FdSolver::run(std::span<const double> u0, const FluxFunction* flux,
                             const NoisePath* noise, const SpectralBasis* noise_basis) const {
    const std::size_t N = grid_.nodes();
    if (u0.size() != N) throw ConfigError("initial condition does not match the grid");
    const std::size_t steps = config_.steps();
    const double dt = config_.dt;
    const double r = dt / config_.eps;
    const double th = config_.theta;

    std::vector<double> lo(N), di(N), up(N);
    for (std::size_t i = 0; i < N; ++i) {
        lo[i] = -th * r * lower_[i];
        di[i] = weights_[i] - th * r * diag_[i];
        up[i] = -th * r * upper_[i];
    }
    const detail::TridiagonalSolver solver(std::move(lo), std::move(di), std::move(up));
    const auto S = detail::assemble_flux_operator(op_, grid_);

    GridTrajectory traj;
    traj.grid = grid_;
    std::vector<double> u(u0.begin(), u0.end());
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.values.insert(traj.values.end(), u.begin(), u.end());
    };
    record(0.0);

    std::vector<double> rhs(N), xi(N);
    const bool has_f = !model_.f.is_zero();
    const bool has_g = noise && !model_.g.is_zero();
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        const double c = (1.0 - th) * r;
        for (std::size_t i = 0; i < N; ++i) {
            double su = diag_[i] * u[i];
            if (i > 0) su += lower_[i] * u[i - 1];
            if (i + 1 < N) su += upper_[i] * u[i + 1];
            double v = weights_[i] * u[i] + c * su;
            if (has_f) v += dt * weights_[i] * model_.f.eval(t, grid_.x(i), u[i]);
            rhs[i] = v;
        }
        if (has_g) {
            noise_basis->synthesize(noise->dW(n), xi);
            for (std::size_t i = 0; i < N; ++i)
                rhs[i] += weights_[i] * model_.g.eval(t, grid_.x(i), u[i]) * xi[i];
        }
        if (noise) {
            const auto dB = noise->dB(n);
            rhs[0] += model_.sigma.eval(t, grid_.x_a(), 0.0) * dB[0];
            rhs[N - 1] += model_.sigma.eval(t, grid_.x_b(), 0.0) * dB[1];
        }
        if (flux) {
            const BoundaryData v0 = (*flux)(t);
            const BoundaryData v1 = (*flux)(t + dt);
            rhs[0] += r * S.source_a * (th * v1[0] + (1.0 - th) * v0[0]);
            rhs[N - 1] += r * S.source_b * (th * v1[1] + (1.0 - th) * v0[1]);
        }
        solver.solve(rhs);
        u.swap(rhs);
        for (double x : u) {
            if (!std::isfinite(x)) throw IntegrationFailure(n, "non-finite grid value");
        }
        if ((n + 1) % config_.record_every == 0 || n + 1 == steps)
            record(static_cast<double>(n + 1) * dt);
    }
    return traj;
}

}  // namespace fastavg
