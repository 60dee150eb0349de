#include "fastavg/neumann.hpp"

#include <cmath>

#include "fastavg/error.hpp"
#include "flux_operator.hpp"

namespace fastavg {

namespace {

/// cosh(kappa s) / sinh(kappa L) for 0 <= s <= L without overflow.
double cosh_ratio(double kappa, double s, double L) {
    const double num = 1.0 + std::exp(-2.0 * kappa * s);
    const double den = 1.0 - std::exp(-2.0 * kappa * L);
    return std::exp(kappa * (s - L)) * num / den;
}

}  // namespace

NeumannSolution solve_neumann(const EllipticOperator1D& op, double delta, BoundaryData bdata,
                              std::size_t grid_n, NeumannBranch branch) {
    if (!(delta > 0.0)) throw NumericalError("Neumann problem is singular for delta <= 0");
    UniformGrid grid(op.x_a(), op.x_b(), grid_n);
    op.check_ellipticity(grid);
    const bool closed_form = op.divergence_form() && op.constant_coefficient();
    if (branch == NeumannBranch::analytic && !closed_form)
        throw ConfigError("analytic Neumann branch needs constant a and b = 0");
    const bool use_analytic = branch == NeumannBranch::analytic ||
                              (branch == NeumannBranch::automatic && closed_form);

    NeumannSolution sol;
    sol.delta = delta;
    sol.bdata = bdata;
    sol.grid = grid;
    sol.analytic = use_analytic;
    sol.values.assign(grid.nodes(), 0.0);
    if (bdata[0] == 0.0 && bdata[1] == 0.0) return sol;

    if (use_analytic) {
        const double a = op.a_at(op.x_a());
        const double kappa = std::sqrt(delta / a);
        const double L = grid.length();
        // v = h_b cosh(kappa (x - x_a)) + h_a cosh(kappa (x_b - x)), over a kappa sinh(kappa L).
        for (std::size_t i = 0; i < grid.nodes(); ++i) {
            const double s = grid.x(i) - op.x_a();
            sol.values[i] = (bdata[1] * cosh_ratio(kappa, s, L) +
                             bdata[0] * cosh_ratio(kappa, L - s, L)) /
                            (a * kappa);
        }
        return sol;
    }

    const auto S = detail::assemble_flux_operator(op, grid);
    const std::size_t n = grid.nodes();
    std::vector<double> lower(n), diag(n), upper(n);
    for (std::size_t i = 0; i < n; ++i) {
        lower[i] = -S.lower[i];
        upper[i] = -S.upper[i];
        diag[i] = delta * S.weights[i] - S.diag[i];
    }
    detail::TridiagonalSolver solver(std::move(lower), std::move(diag), std::move(upper));
    sol.values[0] = S.source_a * bdata[0];
    sol.values[n - 1] = S.source_b * bdata[1];
    solver.solve(sol.values);
    return sol;
}

double adjoint_mode_coeff(const SpectralBasis& basis, double delta, BoundaryData bdata, std::size_t k) {
    return (bdata[0] * basis.trace_a(k) + bdata[1] * basis.trace_b(k)) / (delta + basis.alpha(k));
}

double boundary_propagator_coeff(const SpectralBasis& basis, double /*delta0*/, double t,
                                 BoundaryData bdata, std::size_t k) {
    if (t < 0.0) throw ConfigError("propagator time must be non-negative");
    // (delta0 + alpha_k) <N_delta0 h, e_k> cancels to the boundary traces.
    return std::exp(-basis.alpha(k) * t) * (bdata[0] * basis.trace_a(k) + bdata[1] * basis.trace_b(k));
}

}  // namespace fastavg
