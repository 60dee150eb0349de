#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's solvers.

#include <functional>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

/// Smallest `modes` eigenvalues of -(a u')' = alpha u with natural boundary
/// conditions, by a dense generalized solve of the linear finite-element
/// discretization (consistent mass, 3-point Gauss stiffness) on n elements.
std::vector<double> fem_eigenvalues(const Fn& a, double x_a, double x_b, std::size_t n,
                                    std::size_t modes);

/// Solution of delta v - (a v')' = 0, -a v'(x_a) = h_a, a v'(x_b) = h_b by
/// linear shooting with classical RK4, `refine` steps per cell; returns v at the
/// n+1 uniform nodes.
std::vector<double> neumann_shooting(const Fn& a, double x_a, double x_b, double delta,
                                     double h_a, double h_b, std::size_t n, std::size_t refine);

/// Normalized solution of a m' = b m on [x_a, x_b] by RK4 at the n+1 uniform nodes.
std::vector<double> stationary_density(const Fn& a, const Fn& b, double x_a, double x_b,
                                       std::size_t n, std::size_t refine);

/// Var of X(t) for dX = -k X dt + s dW, X(0) = 0.
double ou_variance(double k, double s, double t);

/// Composite Simpson rule with n (even) panels.
double simpson(const Fn& f, double lo, double hi, std::size_t n);

}  // namespace oracle
