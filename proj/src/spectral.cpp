#include "fastavg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <lapacke.h>

#include "fastavg/error.hpp"

namespace fastavg {

namespace {

struct FdEigen {
    std::vector<double> alphas;
    std::vector<double> vectors;  // modes x nodes, row-major
    std::vector<double> residuals;
};

/// Lowest `modes` eigenpairs of -(p u')' = alpha w u with zero flux, where p is
/// sampled at cell midpoints and w holds nodal masses. Vectors are w-orthonormal.
FdEigen fd_eigen(const UniformGrid& grid, std::span<const double> p_mid,
                 std::span<const double> mass, std::size_t modes) {
    const std::size_t n = grid.nodes();
    const double h = grid.h();
    std::vector<double> d(n, 0.0);
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double c = p_mid[i] / h;
        d[i] += c;
        d[i + 1] += c;
        e[i] = -c / std::sqrt(mass[i] * mass[i + 1]);
    }
    for (std::size_t i = 0; i < n; ++i) d[i] /= mass[i];

    std::vector<double> d_work = d;
    std::vector<double> e_work = e;
    std::vector<double> w(n);
    std::vector<double> z(n * modes);
    std::vector<lapack_int> support(2 * modes);
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(
        LAPACK_COL_MAJOR, 'V', 'I', static_cast<lapack_int>(n), d_work.data(), e_work.data(), 0.0,
        0.0, 1, static_cast<lapack_int>(modes), 0.0, &found, w.data(), z.data(),
        static_cast<lapack_int>(n), support.data());

    FdEigen out;
    out.alphas.assign(w.begin(), w.begin() + std::min<std::size_t>(found, modes));
    out.vectors.resize(modes * n);
    out.residuals.resize(modes, 0.0);
    for (std::size_t k = 0; k < out.alphas.size(); ++k) {
        double* row = out.vectors.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) row[i] = z[k * n + i] / std::sqrt(mass[i]);
        if (row[0] < 0.0) {
            for (std::size_t i = 0; i < n; ++i) row[i] = -row[i];
        }
        // Residual of the symmetric problem in the scaled variable.
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double yi = z[k * n + i];
            double ty = d[i] * yi;
            if (i > 0) ty += e[i - 1] * z[k * n + i - 1];
            if (i + 1 < n) ty += e[i] * z[k * n + i + 1];
            res = std::max(res, std::abs(ty - w[k] * yi));
        }
        out.residuals[k] = res;
    }
    if (info != 0 || out.alphas.size() != modes) {
        std::ostringstream os;
        os << "tridiagonal eigensolver did not converge (info=" << info << ", found " << found
           << " of " << modes << " pairs); residual norms:";
        for (double r : out.residuals) os << ' ' << r;
        throw NumericalError(os.str());
    }
    return out;
}

std::vector<double> midpoint_samples(const UniformGrid& grid, const Field& field) {
    std::vector<double> out(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i) {
        out[i] = field.eval(0.0, 0.5 * (grid.x(i) + grid.x(i + 1)), 0.0);
    }
    return out;
}

std::vector<double> trapezoid_mass(const UniformGrid& grid) {
    std::vector<double> mass(grid.nodes());
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = grid.weight(i);
    return mass;
}

void check_modes(std::size_t modes, std::size_t grid_n) {
    if (modes == 0) throw ConfigError("eigensolve needs at least one mode");
    if (4 * modes > grid_n)
        throw ConfigError("eigensolve requires K <= grid_n / 4 (K = " + std::to_string(modes) +
                          ", grid_n = " + std::to_string(grid_n) + ")");
}

SpectralBasis finalize_fd(const UniformGrid& grid, FdEigen eig, std::size_t modes) {
    // The discrete null space is exactly the constants.
    eig.alphas[0] = 0.0;
    const double c = 1.0 / std::sqrt(grid.length());
    std::fill(eig.vectors.begin(), eig.vectors.begin() + grid.nodes(), c);
    if (modes > 1 && !(eig.alphas[1] > 0.0)) throw NumericalError("no spectral gap: alpha_1 <= 0");
    return SpectralBasis(grid, std::move(eig.alphas), std::move(eig.vectors), false);
}

}  // namespace

EllipticOperator1D::EllipticOperator1D(double x_a, double x_b, Field a, Field b)
    : x_a_(x_a), x_b_(x_b), a_(std::move(a)), b_(std::move(b)) {
    if (!(x_a < x_b)) throw ConfigError("operator domain needs x_a < x_b");
    for (const Field* f : {&a_, &b_}) {
        if (f->depends_on_t() || f->depends_on_u())
            throw ConfigError("operator coefficients may depend on x only: " + f->describe());
    }
}

void EllipticOperator1D::check_ellipticity(const UniformGrid& grid) const {
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double v = a_at(grid.x(i));
        if (!(v > 0.0)) throw EllipticityViolation(grid.x(i), v);
    }
    for (std::size_t i = 0; i < grid.n(); ++i) {
        const double x = 0.5 * (grid.x(i) + grid.x(i + 1));
        const double v = a_at(x);
        if (!(v > 0.0)) throw EllipticityViolation(x, v);
    }
}

SpectralBasis::SpectralBasis(UniformGrid grid, std::vector<double> alphas,
                             std::vector<double> efuncs, bool analytic)
    : grid_(grid), alphas_(std::move(alphas)), efuncs_(std::move(efuncs)), analytic_(analytic) {
    if (efuncs_.size() != alphas_.size() * grid_.nodes())
        throw ConfigError("eigenfunction samples do not match the grid");
}

std::span<const double> SpectralBasis::efunc(std::size_t k) const {
    return {efuncs_.data() + k * grid_.nodes(), grid_.nodes()};
}

std::vector<double> SpectralBasis::project(std::span<const double> values) const {
    std::vector<double> coeffs(modes());
    project(values, coeffs);
    return coeffs;
}

void SpectralBasis::project(std::span<const double> values, std::span<double> coeffs) const {
    const std::size_t n = grid_.nodes();
    if (values.size() != n) throw ConfigError("grid function has the wrong length");
    const double h = grid_.h();
    const std::size_t K = std::min(coeffs.size(), modes());
    for (std::size_t k = 0; k < K; ++k) {
        const double* e = efuncs_.data() + k * n;
        double acc = 0.5 * (e[0] * values[0] + e[n - 1] * values[n - 1]);
        for (std::size_t i = 1; i + 1 < n; ++i) acc += e[i] * values[i];
        coeffs[k] = h * acc;
    }
}

std::vector<double> SpectralBasis::synthesize(std::span<const double> coeffs) const {
    std::vector<double> values(grid_.nodes());
    synthesize(coeffs, values);
    return values;
}

void SpectralBasis::synthesize(std::span<const double> coeffs, std::span<double> values) const {
    const std::size_t n = grid_.nodes();
    std::fill(values.begin(), values.end(), 0.0);
    const std::size_t K = std::min(coeffs.size(), modes());
    for (std::size_t k = 0; k < K; ++k) {
        const double c = coeffs[k];
        if (c == 0.0) continue;
        const double* e = efuncs_.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) values[i] += c * e[i];
    }
}

double SpectralBasis::orthonormality_error() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < modes(); ++j) {
        for (std::size_t k = j; k < modes(); ++k) {
            const double g = grid_.inner(efunc(j), efunc(k));
            worst = std::max(worst, std::abs(g - (j == k ? 1.0 : 0.0)));
        }
    }
    return worst;
}

double InvariantMeasure::mean(std::span<const double> h) const { return grid.inner(h, density); }

SpectralBasis eigensolve(const EllipticOperator1D& op, std::size_t modes, std::size_t grid_n) {
    if (!op.divergence_form())
        throw ConfigError("eigensolve supports divergence-form operators only (b must vanish)");
    check_modes(modes, grid_n);
    UniformGrid grid(op.x_a(), op.x_b(), grid_n);
    op.check_ellipticity(grid);
    if (!op.constant_coefficient()) return eigensolve_fd(op, modes, grid_n);

    const double a = op.a_at(op.x_a());
    const double L = grid.length();
    const std::size_t n = grid.nodes();
    std::vector<double> alphas(modes);
    std::vector<double> efuncs(modes * n);
    for (std::size_t k = 0; k < modes; ++k) {
        const double wave = static_cast<double>(k) * std::numbers::pi / L;
        alphas[k] = a * wave * wave;
        const double amp = (k == 0) ? 1.0 / std::sqrt(L) : std::sqrt(2.0 / L);
        for (std::size_t i = 0; i < n; ++i) {
            efuncs[k * n + i] = (k == 0) ? amp : amp * std::cos(wave * (grid.x(i) - op.x_a()));
        }
    }
    return SpectralBasis(grid, std::move(alphas), std::move(efuncs), true);
}

SpectralBasis eigensolve_fd(const EllipticOperator1D& op, std::size_t modes, std::size_t grid_n) {
    if (!op.divergence_form())
        throw ConfigError("eigensolve supports divergence-form operators only (b must vanish)");
    check_modes(modes, grid_n);
    UniformGrid grid(op.x_a(), op.x_b(), grid_n);
    op.check_ellipticity(grid);
    const auto p = midpoint_samples(grid, op.a());
    const auto mass = trapezoid_mass(grid);
    return finalize_fd(grid, fd_eigen(grid, p, mass, modes), modes);
}

InvariantMeasure invariant_density(const EllipticOperator1D& op, std::size_t grid_n) {
    UniformGrid grid(op.x_a(), op.x_b(), grid_n);
    op.check_ellipticity(grid);
    InvariantMeasure m;
    m.grid = grid;
    const std::size_t n = grid.nodes();

    if (op.divergence_form()) {
        m.uniform = true;
        m.density.assign(n, 1.0 / grid.length());
        if (op.constant_coefficient()) {
            const double wave = std::numbers::pi / grid.length();
            m.gap = op.a_at(op.x_a()) * wave * wave;
        } else {
            m.gap = fd_eigen(grid, midpoint_samples(grid, op.a()), trapezoid_mass(grid), 2).alphas[1];
        }
        return m;
    }

    // a m' - b m = 0: m = exp(int_{x_a}^x b/a) / Z.
    std::vector<double> ratio(n);
    for (std::size_t i = 0; i < n; ++i) ratio[i] = op.b_at(grid.x(i)) / op.a_at(grid.x(i));
    std::vector<double> phi(n, 0.0);
    const double h = grid.h();
    for (std::size_t i = 1; i < n; ++i) {
        const double step = 0.5 * h * (ratio[i - 1] + ratio[i]);
        if (!std::isfinite(step)) throw NumericalError("b/a is not finite on the grid");
        if (std::abs(step) > 1.0)
            throw NumericalError("invariant density varies by more than a factor e per cell at x = " +
                                 std::to_string(grid.x(i)) + "; increase grid_n");
        phi[i] = phi[i - 1] + step;
    }
    const double top = *std::max_element(phi.begin(), phi.end());
    m.density.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.density[i] = std::exp(phi[i] - top);
    const double z = grid.integrate(m.density);
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("invariant density cannot be normalized");
    for (auto& v : m.density) v /= z;

    // The drift operator is symmetric in L^2(m): -(a m u')' = alpha m u.
    std::vector<double> p(grid.n());
    const auto a_mid = midpoint_samples(grid, op.a());
    for (std::size_t i = 0; i < grid.n(); ++i) p[i] = a_mid[i] * std::sqrt(m.density[i] * m.density[i + 1]);
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) mass[i] = grid.weight(i) * m.density[i];
    m.gap = fd_eigen(grid, p, mass, 2).alphas[1];
    return m;
}

std::vector<double> semigroup_apply(const SpectralBasis& basis, const InvariantMeasure& measure,
                                    double t, std::span<const double> h) {
    if (t < 0.0) throw ConfigError("semigroup time must be non-negative");
    if (!(measure.grid == basis.grid())) throw ConfigError("measure and basis grids differ");
    auto coeffs = basis.project(h);
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::exp(-basis.alpha(k) * t);
    return basis.synthesize(coeffs);
}

double hmu_norm(const InvariantMeasure& measure, std::span<const double> h) {
    std::vector<double> sq(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) sq[i] = h[i] * h[i];
    return std::sqrt(measure.grid.inner(sq, measure.density));
}

}  // namespace fastavg
