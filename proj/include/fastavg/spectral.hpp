#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fastavg/coefficients.hpp"
#include "fastavg/grid.hpp"

namespace fastavg {

/// A = (a(x) u')' + b(x) u' on [x_a, x_b] with conormal boundary condition
/// a(x) u'(x) nu(x) = 0.
class EllipticOperator1D {
public:
    /// a and b may depend on x only. Throws ConfigError otherwise.
    EllipticOperator1D(double x_a, double x_b, Field a, Field b = Field());

    double x_a() const noexcept { return x_a_; }
    double x_b() const noexcept { return x_b_; }
    double length() const noexcept { return x_b_ - x_a_; }
    const Field& a() const noexcept { return a_; }
    const Field& b() const noexcept { return b_; }

    double a_at(double x) const { return a_.eval(0.0, x, 0.0); }
    double b_at(double x) const { return b_.eval(0.0, x, 0.0); }

    bool divergence_form() const { return b_.is_zero(); }
    bool constant_coefficient() const { return !a_.depends_on_x(); }

    /// Throws EllipticityViolation if a <= 0 at any node or midpoint of `grid`.
    void check_ellipticity(const UniformGrid& grid) const;

private:
    double x_a_;
    double x_b_;
    Field a_;
    Field b_;
};

/// Eigenpairs of -A: A e_k = -alpha_k e_k, sampled on a uniform grid.
class SpectralBasis {
public:
    SpectralBasis(UniformGrid grid, std::vector<double> alphas, std::vector<double> efuncs,
                  bool analytic);

    std::size_t modes() const noexcept { return alphas_.size(); }
    const UniformGrid& grid() const noexcept { return grid_; }
    std::span<const double> alphas() const noexcept { return alphas_; }
    double alpha(std::size_t k) const { return alphas_[k]; }
    /// Grid samples of e_k (grid().nodes() values).
    std::span<const double> efunc(std::size_t k) const;
    double trace_a(std::size_t k) const { return efunc(k).front(); }
    double trace_b(std::size_t k) const { return efunc(k).back(); }
    bool analytic() const noexcept { return analytic_; }

    /// Mode coefficients <h, e_k>_H by trapezoid quadrature.
    std::vector<double> project(std::span<const double> values) const;
    void project(std::span<const double> values, std::span<double> coeffs) const;
    /// Grid samples of sum_k coeffs[k] e_k.
    std::vector<double> synthesize(std::span<const double> coeffs) const;
    void synthesize(std::span<const double> coeffs, std::span<double> values) const;

    /// Max |<e_j, e_k> - delta_jk| over the Gram matrix.
    double orthonormality_error() const;

private:
    UniformGrid grid_;
    std::vector<double> alphas_;
    std::vector<double> efuncs_;  // row-major, modes() x grid().nodes()
    bool analytic_;
};

/// Invariant probability density m(x) of e^{tA}.
struct InvariantMeasure {
    UniformGrid grid;
    std::vector<double> density;
    /// Spectral gap gamma; equals alpha_1 in divergence form.
    double gap = 0.0;
    bool uniform = false;

    double total() const { return grid.integrate(density); }
    /// <h, mu> = int h m dx.
    double mean(std::span<const double> h) const;
};

/// First K eigenpairs of -A (divergence form only). Analytic cosine basis when
/// a is constant; otherwise a symmetric 3-point finite-difference solve.
/// Requires K <= grid_n / 4.
SpectralBasis eigensolve(const EllipticOperator1D& op, std::size_t modes, std::size_t grid_n);

/// Numeric branch regardless of a's form (used to cross-check the analytic one).
SpectralBasis eigensolve_fd(const EllipticOperator1D& op, std::size_t modes, std::size_t grid_n);

InvariantMeasure invariant_density(const EllipticOperator1D& op, std::size_t grid_n);

/// sum_k e^{-alpha_k t} <h, e_k> e_k.
std::vector<double> semigroup_apply(const SpectralBasis& basis, const InvariantMeasure& measure,
                                    double t, std::span<const double> h);

/// (int |h|^2 m dx)^{1/2}.
double hmu_norm(const InvariantMeasure& measure, std::span<const double> h);

}  // namespace fastavg
