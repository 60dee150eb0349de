#include "fastavg/spde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastavg/error.hpp"

namespace fastavg {

std::size_t SpdeConfig::steps() const {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("dt and horizon must be positive");
    const double ratio = horizon / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
        throw ConfigError("horizon must be an integer multiple of dt");
    return n;
}

std::vector<double> project_initial(const SpectralBasis& basis, const Field& u0) {
    const auto& grid = basis.grid();
    std::vector<double> values(grid.nodes());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = u0.eval(0.0, grid.x(i), 0.0);
    return basis.project(values);
}

namespace {

// <s e_l, e_k> by trapezoid quadrature.
Eigen::MatrixXd weighted_mass(const SpectralBasis& basis, const AffineSplit& split) {
    const auto& grid = basis.grid();
    const std::size_t K = basis.modes();
    const std::size_t N = grid.nodes();
    Eigen::MatrixXd E(N, K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto e = basis.efunc(k);
        for (std::size_t i = 0; i < N; ++i) E(i, k) = e[i];
    }
    Eigen::VectorXd w(N);
    for (std::size_t i = 0; i < N; ++i) w(i) = grid.weight(i) * split.space(grid.x(i));
    return E.transpose() * w.asDiagonal() * E;
}

std::vector<double> space_projection(const SpectralBasis& basis, const AffineSplit& split) {
    const auto& grid = basis.grid();
    std::vector<double> s(grid.nodes());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = split.space(grid.x(i));
    return basis.project(s);
}

}  // namespace

SpdeSolver::SpdeSolver(const SpectralBasis& basis, ModelSpec model, SpdeConfig config)
    : basis_(&basis), model_(std::move(model)), config_(std::move(config)), K_(basis.modes()) {
    validate(model_, Purpose::simulate, config_.horizon).require();
    if (!(config_.eps > 0.0)) throw ConfigError("eps must be positive");
    config_.steps();
    if (config_.u0.size() != K_)
        throw ConfigError("initial condition has " + std::to_string(config_.u0.size()) +
                          " modes, basis has " + std::to_string(K_));

    const double dt = config_.dt;
    const double eps = config_.eps;
    damping_.resize(K_);
    drift_.resize(K_);
    gain_.resize(K_);
    for (std::size_t k = 0; k < K_; ++k) {
        const double a = basis.alpha(k);
        if (a == 0.0) {
            damping_[k] = 1.0;
            drift_[k] = dt;
            gain_[k] = 1.0;
            continue;
        }
        const double x = a * dt / eps;
        const double E = std::exp(-x);
        damping_[k] = E;
        drift_[k] = -eps * std::expm1(-x) / a;
        gain_[k] = config_.exact_variance ? std::sqrt(-std::expm1(-2.0 * x) / (2.0 * x)) : E;
    }
    std::vector<double> ones(basis.grid().nodes(), 1.0);
    one_ = basis.project(ones);

    const bool grid_quad = config_.quadrature == Quadrature::grid;
    auto project_terms = [&](const std::vector<AffineSplit>& splits, bool need_space) {
        std::vector<ProjectedTerm> out;
        for (const auto& split : splits) {
            ProjectedTerm term{split, {}, {}};
            if (need_space) term.space = split.space_constant() ? one_ : space_projection(basis, split);
            const bool need_mass = need_space ? split.q != 0.0 : true;
            if (need_mass && !split.space_constant()) term.mass = weighted_mass(basis, split);
            out.push_back(std::move(term));
        }
        return out;
    };
    if (auto splits = model_.f.affine_splits(); splits && !grid_quad) {
        f_terms_ = project_terms(*splits, true);
    } else {
        use_grid_f_ = true;
    }

    g_zero_ = model_.g.is_zero();
    const bool additive = !model_.g.depends_on_u();
    if (config_.exact_variance && !additive)
        throw ConfigError("exact-variance stepping needs u-independent noise intensity g");
    if (!g_zero_) {
        if (additive && !grid_quad) {
            g_terms_ = project_terms(*model_.g.affine_splits(), false);
        } else {
            use_grid_g_ = true;
        }
    }
}

SpdeSolver::Workspace SpdeSolver::make_workspace() const {
    Workspace ws;
    ws.forcing.assign(K_, 0.0);
    ws.noise.assign(K_, 0.0);
    if (use_grid_f_ || use_grid_g_) {
        const std::size_t N = basis_->grid().nodes();
        ws.grid_u.assign(N, 0.0);
        ws.grid_f.assign(N, 0.0);
        ws.grid_xi.assign(N, 0.0);
    }
    return ws;
}

void SpdeSolver::reaction(double t, std::span<const double> u, Workspace& ws) const {
    auto& F = ws.forcing;
    if (use_grid_f_) {
        const auto& grid = basis_->grid();
        basis_->synthesize(u, ws.grid_u);
        for (std::size_t i = 0; i < ws.grid_f.size(); ++i)
            ws.grid_f[i] = model_.f.eval(t, grid.x(i), ws.grid_u[i]);
        basis_->project(ws.grid_f, F);
        return;
    }
    std::fill(F.begin(), F.end(), 0.0);
    Eigen::Map<const Eigen::VectorXd> uv(u.data(), static_cast<Eigen::Index>(K_));
    Eigen::Map<Eigen::VectorXd> Fv(F.data(), static_cast<Eigen::Index>(K_));
    for (const auto& term : f_terms_) {
        const double tau = term.split.time(t);
        const double p = tau * term.split.p;
        const double q = tau * term.split.q;
        if (p != 0.0) {
            for (std::size_t k = 0; k < K_; ++k) F[k] += p * term.space[k];
        }
        if (q == 0.0) continue;
        if (term.mass.size() == 0) {
            for (std::size_t k = 0; k < K_; ++k) F[k] += q * u[k];
        } else {
            Fv.noalias() += q * (term.mass * uv);
        }
    }
}

void SpdeSolver::interior_noise(double t, std::span<const double> u, std::span<const double> dW,
                                Workspace& ws) const {
    auto& out = ws.noise;
    if (g_zero_) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (use_grid_g_) {
        const auto& grid = basis_->grid();
        basis_->synthesize(u, ws.grid_u);
        basis_->synthesize(dW, ws.grid_xi);
        for (std::size_t i = 0; i < ws.grid_xi.size(); ++i)
            ws.grid_f[i] = model_.g.eval(t, grid.x(i), ws.grid_u[i]) * ws.grid_xi[i];
        basis_->project(ws.grid_f, out);
        return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    Eigen::Map<const Eigen::VectorXd> w(dW.data(), static_cast<Eigen::Index>(K_));
    Eigen::Map<Eigen::VectorXd> o(out.data(), static_cast<Eigen::Index>(K_));
    for (const auto& term : g_terms_) {
        const double c = term.split.time(t) * term.split.p;
        if (term.mass.size() == 0) {
            for (std::size_t k = 0; k < K_; ++k) out[k] += c * dW[k];
        } else {
            o.noalias() += c * (term.mass * w);
        }
    }
}

void SpdeSolver::advance(std::span<double> u, double t, std::size_t n, std::span<const double> dW,
                         std::span<const double> dB, Workspace& ws) const {
    if (dW.size() != K_ || dB.size() != 2)
        throw ConfigError("noise increments do not match the basis size");
    reaction(t, u, ws);
    interior_noise(t, u, dW, ws);
    const auto& grid = basis_->grid();
    const double sa = model_.sigma.eval(t, grid.x_a(), 0.0) * dB[0];
    const double sb = model_.sigma.eval(t, grid.x_b(), 0.0) * dB[1];
    bool finite = true;
    for (std::size_t k = 0; k < K_; ++k) {
        const double kick = ws.noise[k] + sa * basis_->trace_a(k) + sb * basis_->trace_b(k);
        u[k] = damping_[k] * u[k] + drift_[k] * ws.forcing[k] + gain_[k] * kick;
        finite = finite && std::isfinite(u[k]);
    }
    if (!finite) throw IntegrationFailure(n, "non-finite mode coefficient");
}

void SpdeSolver::step(std::span<double> u, std::size_t n, std::span<const double> dW,
                      std::span<const double> dB, Workspace& ws) const {
    advance(u, static_cast<double>(n) * config_.dt, n, dW, dB, ws);
}

std::vector<double> SpdeSolver::step(std::span<const double> u, double t,
                                     std::span<const double> dW,
                                     std::span<const double> dB) const {
    std::vector<double> out(u.begin(), u.end());
    auto ws = make_workspace();
    advance(out, t, 0, dW, dB, ws);
    return out;
}

void SpdeSolver::run(
    const NoisePath& noise,
    const std::function<void(std::size_t, double, std::span<const double>)>& observer) const {
    const std::size_t steps = config_.steps();
    if (noise.modes() != K_) throw ConfigError("noise path modes do not match the basis size");
    if (noise.steps() < steps || std::abs(noise.dt() - config_.dt) > 1e-12 * config_.dt)
        throw ConfigError("noise path does not cover the horizon at this dt");
    std::vector<double> u = config_.u0;
    auto ws = make_workspace();
    observer(0, 0.0, u);
    for (std::size_t n = 0; n < steps; ++n) {
        step(u, n, noise.dW(n), noise.dB(n), ws);
        observer(n + 1, static_cast<double>(n + 1) * config_.dt, u);
    }
}

SpdePath SpdeSolver::integrate(const NoisePath& noise) const {
    SpdePath path;
    path.K = K_;
    const std::size_t steps = config_.steps();
    path.times.reserve(steps + 1);
    path.modes.reserve((steps + 1) * K_);
    run(noise, [&](std::size_t, double t, std::span<const double> u) {
        path.times.push_back(t);
        path.modes.insert(path.modes.end(), u.begin(), u.end());
    });
    return path;
}

}  // namespace fastavg
