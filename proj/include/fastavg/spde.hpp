#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fastavg/coefficients.hpp"
#include "fastavg/noise.hpp"
#include "fastavg/spectral.hpp"

namespace fastavg {

/// How the reaction and noise-intensity projections are evaluated each step.
enum class Quadrature {
    /// Precomputed projections of the affine split (exact rewrite of `grid`).
    projected,
    /// Synthesize u on the grid, evaluate the fields pointwise and project back.
    grid,
};

struct SpdeConfig {
    double eps = 1.0;
    double horizon = 1.0;
    double dt = 1e-3;
    /// Initial mode coefficients (basis.modes() entries).
    std::vector<double> u0;
    /// Replace E_k dW by the exact one-step OU standard deviation. Requires additive noise.
    bool exact_variance = false;
    Quadrature quadrature = Quadrature::projected;

    std::size_t steps() const;
};

/// Mode trajectory u_k(t_n).
struct SpdePath {
    std::vector<double> times;
    std::vector<double> modes;  // (times.size()) x K, row-major
    std::size_t K = 0;

    std::span<const double> at(std::size_t n) const { return {modes.data() + n * K, K}; }
};

/// Mode coefficients of u0(x) = field(0, x, 0); exact for constant fields.
std::vector<double> project_initial(const SpectralBasis& basis, const Field& u0);

/// Exponential Euler integrator of the mild formulation in the eigenbasis:
///   u_k+ = E_k u_k + eps (1 - E_k)/alpha_k F_k + E_k [ sum_j G_kj dW_j
///          + sigma(t, x_a) e_k(x_a) dB_1 + sigma(t, x_b) e_k(x_b) dB_2 ],
/// E_k = exp(-alpha_k dt / eps).
class SpdeSolver {
public:
    /// The model must satisfy H2; throws HypothesisViolation otherwise.
    SpdeSolver(const SpectralBasis& basis, ModelSpec model, SpdeConfig config);

    struct Workspace {
        std::vector<double> forcing;
        std::vector<double> noise;
        std::vector<double> grid_u;
        std::vector<double> grid_f;
        std::vector<double> grid_xi;
    };
    Workspace make_workspace() const;

    /// One step in place; `n` is the step index for diagnostics.
    void step(std::span<double> u, std::size_t n, std::span<const double> dW,
              std::span<const double> dB, Workspace& ws) const;
    std::vector<double> step(std::span<const double> u, double t, std::span<const double> dW,
                             std::span<const double> dB) const;

    /// Calls observer(n, t_n, u) for n = 0..steps.
    void run(const NoisePath& noise,
             const std::function<void(std::size_t, double, std::span<const double>)>& observer) const;
    SpdePath integrate(const NoisePath& noise) const;

    const SpdeConfig& config() const noexcept { return config_; }
    const SpectralBasis& basis() const noexcept { return *basis_; }
    std::span<const double> damping() const noexcept { return damping_; }
    std::span<const double> noise_gain() const noexcept { return gain_; }

private:
    void advance(std::span<double> u, double t, std::size_t n, std::span<const double> dW,
                 std::span<const double> dB, Workspace& ws) const;
    void reaction(double t, std::span<const double> u, Workspace& ws) const;
    void interior_noise(double t, std::span<const double> u, std::span<const double> dW,
                        Workspace& ws) const;

    const SpectralBasis* basis_;
    ModelSpec model_;
    SpdeConfig config_;
    std::size_t K_;

    std::vector<double> damping_;  // E_k
    std::vector<double> drift_;    // eps (1 - E_k)/alpha_k, dt for alpha_k = 0
    std::vector<double> gain_;     // E_k, or the exact OU standard deviation over sqrt(dt)
    std::vector<double> one_;      // <1, e_k>

    // One projected term time(t) * (p + q u) * space(x), see AffineSplit.
    struct ProjectedTerm {
        AffineSplit split;
        std::vector<double> space;  // <s, e_k>
        Eigen::MatrixXd mass;       // <s e_l, e_k>, empty when s is constant
    };
    std::vector<ProjectedTerm> f_terms_;
    std::vector<ProjectedTerm> g_terms_;  // used when g is additive
    bool g_zero_ = false;
    bool use_grid_f_ = false;
    bool use_grid_g_ = false;
};

}  // namespace fastavg
