#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fastavg/coefficients.hpp"
#include "fastavg/neumann.hpp"
#include "fastavg/noise.hpp"
#include "fastavg/spectral.hpp"

namespace fastavg {

struct FdConfig {
    std::size_t grid_n = 256;
    double dt = 1e-3;
    double eps = 1.0;
    double horizon = 1.0;
    /// 0.5 = Crank-Nicolson, 1 = backward Euler. Must lie in [0.5, 1].
    double theta = 0.5;
    /// Store every n-th time level (the final level is always stored).
    std::size_t record_every = 1;

    std::size_t steps() const;
};

/// Grid samples u(t_n, x_i) at recorded time levels.
struct GridTrajectory {
    UniformGrid grid;
    std::vector<double> times;
    std::vector<double> values;  // times.size() x grid.nodes()

    std::span<const double> at(std::size_t n) const {
        return {values.data() + n * grid.nodes(), grid.nodes()};
    }
    std::span<const double> back() const { return at(times.size() - 1); }
};

/// Deterministic conormal flux v(t) = (v_a, v_b) for du/dt = A u / eps + f(u).
using FluxFunction = std::function<BoundaryData(double)>;

/// Theta-scheme finite-difference integrator in physical space. Diffusion is
/// implicit; reaction and noise are explicit. The operator is assembled from
/// trapezoid-weighted control volumes so boundary flux enters the end cells.
class FdSolver {
public:
    FdSolver(const EllipticOperator1D& op, ModelSpec model, FdConfig config);

    /// Stochastic run. Interior increments are projected to the grid through
    /// `noise_basis` (sampled on the same grid); boundary increments enter the
    /// end cells as sigma * dB. Drift operators are rejected.
    GridTrajectory integrate(std::span<const double> u0, const NoisePath& noise,
                             const SpectralBasis& noise_basis) const;

    /// Deterministic run with flux data. Supports b != 0.
    GridTrajectory integrate(std::span<const double> u0, const FluxFunction& flux) const;

    const UniformGrid& grid() const noexcept { return grid_; }

private:
    GridTrajectory run(std::span<const double> u0, const FluxFunction* flux,
                       const NoisePath* noise, const SpectralBasis* noise_basis) const;

    EllipticOperator1D op_;
    ModelSpec model_;
    FdConfig config_;
    UniformGrid grid_;
    // Tridiagonal operator S (flux form including drift) and trapezoid weights W.
    std::vector<double> lower_, diag_, upper_, weights_;
};

}  // namespace fastavg
