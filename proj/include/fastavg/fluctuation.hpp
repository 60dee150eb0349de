#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fastavg/averaged.hpp"
#include "fastavg/coefficients.hpp"
#include "fastavg/noise.hpp"
#include "fastavg/spde.hpp"
#include "fastavg/spectral.hpp"

namespace fastavg {

/// Covariance of the Gaussian fluctuation limit in mode coordinates. Row and
/// column 0 are identically zero (the centering projection removes the flat mode).
struct I0Covariance {
    double t = 0.0;
    std::size_t K = 0;
    Eigen::MatrixXd C;  // K x K

    /// Block over modes 1..K-1.
    Eigen::MatrixXd centered() const { return C.bottomRightCorner(K - 1, K - 1); }
};

/// C_kl = [sum_j lambda_j^2 G_kj G_lj + sum_i theta_i^2 sigma(t, eta_i)^2 e_k(eta_i) e_l(eta_i)]
///        / (alpha_k + alpha_l),  k, l >= 1,  G_kj = <g(t, .) e_j, e_k>.
/// Throws HypothesisViolation when the model fails H4.
I0Covariance i0_covariance(const ModelSpec& model, const SpectralBasis& basis,
                           const NoiseSpec& noise, double t);

/// Mode coordinates of z = (u - v)/sqrt(eps): z_k = (u_k - v <1, e_k>)/sqrt(eps).
/// Returns a path-major (times x K) matrix. Throws ConfigError on time-grid mismatch.
std::vector<double> z_field(const SpdePath& spde, const ScalarPath& averaged,
                            const SpectralBasis& basis, double eps);

struct ComparisonThresholds {
    /// Max relative error on diagonal entries; off-diagonal errors are
    /// normalized by sqrt(C_kk C_ll).
    double cov_rel_tol = 0.15;
    /// Max |mean| in standard errors.
    double mean_z_max = 3.0;
    /// Two-sided family-wise level for the normality diagnostics.
    double level = 0.01;
};

struct ModeComparison {
    std::size_t mode = 0;
    double c_analytic = 0.0;
    double c_empirical = 0.0;
    double rel_err = 0.0;
    double mean = 0.0;
    double mean_z = 0.0;
    double skew = 0.0;
    double excess_kurtosis = 0.0;
};

struct GaussianReport {
    std::size_t samples = 0;
    std::vector<ModeComparison> modes;
    /// Largest |C_emp - C| / sqrt(C_kk C_ll) over off-diagonal pairs.
    double max_offdiag_err = 0.0;
    /// Mean over k <= l of |C_emp - C| / sqrt(C_kk C_ll).
    double discrepancy = 0.0;
    /// Largest |C_emp - C| in units of its sampling standard deviation.
    double max_cov_z = 0.0;
    double normality_z = 0.0;

    bool covariance_ok = false;
    bool means_ok = false;
    bool normality_ok = false;
    bool passed() const { return covariance_ok && means_ok && normality_ok; }
};

/// Compares samples (M x m, columns = modes 1..m) against the leading m x m block
/// of C.centered(). Requires M >= 500.
GaussianReport gaussian_compare(const Eigen::MatrixXd& samples, const I0Covariance& cov,
                                const ComparisonThresholds& thresholds = {});

/// M draws from Normal(0, C.centered()) restricted to the first m modes.
Eigen::MatrixXd sample_gaussian(const I0Covariance& cov, std::size_t m, std::size_t samples,
                                std::uint64_t seed);

/// Two-sided standard normal quantile for a family-wise level split over `tests`.
double bonferroni_z(double level, std::size_t tests);

}  // namespace fastavg
