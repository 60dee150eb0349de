#pragma once

// Internal: finite-volume assembly of A = (a u')' + b u' with conormal flux data.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fastavg/error.hpp"
#include "fastavg/grid.hpp"
#include "fastavg/spectral.hpp"

namespace fastavg::detail {

/// W du/dt = S u + source_a * h_a e_0 + source_b * h_b e_N, W = trapezoid weights.
struct FluxOperator {
    std::vector<double> lower;  // S_{i,i-1}, lower[0] unused
    std::vector<double> diag;
    std::vector<double> upper;  // S_{i,i+1}, upper[N] unused
    std::vector<double> weights;
    double source_a = 1.0;
    double source_b = 1.0;
};

inline FluxOperator assemble_flux_operator(const EllipticOperator1D& op, const UniformGrid& grid) {
    const std::size_t n = grid.nodes();
    const double h = grid.h();
    FluxOperator S;
    S.lower.assign(n, 0.0);
    S.diag.assign(n, 0.0);
    S.upper.assign(n, 0.0);
    S.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) S.weights[i] = grid.weight(i);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double c = op.a_at(0.5 * (grid.x(i) + grid.x(i + 1))) / h;
        S.upper[i] += c;
        S.diag[i] -= c;
        S.lower[i + 1] += c;
        S.diag[i + 1] -= c;
    }
    if (!op.divergence_form()) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double d = S.weights[i] * op.b_at(grid.x(i)) / (2.0 * h);
            S.lower[i] -= d;
            S.upper[i] += d;
        }
        // At the ends u' is fixed by the flux data: u'(x_a) = -h_a / a, u'(x_b) = h_b / a.
        S.source_a = 1.0 - S.weights[0] * op.b_at(grid.x_a()) / op.a_at(grid.x_a());
        S.source_b = 1.0 + S.weights[n - 1] * op.b_at(grid.x_b()) / op.a_at(grid.x_b());
    }
    return S;
}

/// Tridiagonal LU factors for repeated solves (no pivoting; the matrices here are
/// diagonally dominant M-matrices).
class TridiagonalSolver {
public:
    TridiagonalSolver(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper)
        : lower_(std::move(lower)), upper_(std::move(upper)), pivot_(std::move(diag)) {
        for (std::size_t i = 1; i < pivot_.size(); ++i) {
            if (pivot_[i - 1] == 0.0) throw NumericalError("singular tridiagonal system");
            lower_[i] /= pivot_[i - 1];
            pivot_[i] -= lower_[i] * upper_[i - 1];
        }
        for (double p : pivot_) {
            if (p == 0.0 || !std::isfinite(p)) throw NumericalError("singular tridiagonal system");
        }
    }

    void solve(std::span<double> x) const {
        const std::size_t n = pivot_.size();
        for (std::size_t i = 1; i < n; ++i) x[i] -= lower_[i] * x[i - 1];
        x[n - 1] /= pivot_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - upper_[i] * x[i + 1]) / pivot_[i];
    }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<double> pivot_;
};

}  // namespace fastavg::detail
