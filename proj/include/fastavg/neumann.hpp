#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fastavg/grid.hpp"
#include "fastavg/spectral.hpp"

namespace fastavg {

/// Shift used wherever the Neumann map appears inside a propagator. Any positive
/// value works; boundary_propagator_coeff does not depend on it.
inline constexpr double kDelta0 = 1.0;

/// Conormal flux data (h_a, h_b) at (x_a, x_b). The outward normal is -1 at x_a,
/// so h_a means -a(x_a) v'(x_a) = h_a and h_b means a(x_b) v'(x_b) = h_b.
using BoundaryData = std::array<double, 2>;

/// v = N_delta h: (delta - A) v = 0 in D with conormal flux h on the boundary.
struct NeumannSolution {
    double delta = 0.0;
    BoundaryData bdata{};
    UniformGrid grid;
    std::vector<double> values;
    bool analytic = false;
};

enum class NeumannBranch { automatic, analytic, numeric };

/// Solves the Neumann problem. `automatic` uses the closed cosh form for constant a
/// and b == 0, and a finite-difference solve otherwise. Requires delta > 0.
NeumannSolution solve_neumann(const EllipticOperator1D& op, double delta, BoundaryData bdata,
                              std::size_t grid_n,
                              NeumannBranch branch = NeumannBranch::automatic);

/// <N_delta h, e_k>_H = (h_a e_k(x_a) + h_b e_k(x_b)) / (delta + alpha_k).
double adjoint_mode_coeff(const SpectralBasis& basis, double delta, BoundaryData bdata,
                          std::size_t k);

/// <(delta0 - A) e^{tA} N_delta0 h, e_k>_H = e^{-alpha_k t} (h_a e_k(x_a) + h_b e_k(x_b)).
double boundary_propagator_coeff(const SpectralBasis& basis, double delta0, double t,
                                 BoundaryData bdata, std::size_t k);

}  // namespace fastavg
