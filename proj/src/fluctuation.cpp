#include "fastavg/fluctuation.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "fastavg/error.hpp"

namespace fastavg {

I0Covariance i0_covariance(const ModelSpec& model, const SpectralBasis& basis,
                           const NoiseSpec& noise, double t) {
    validate(model, Purpose::fluctuate, std::max(t, 1.0)).require();
    noise.check();
    const std::size_t K = basis.modes();
    const std::size_t J = std::min(K, noise.modes);
    const auto& grid = basis.grid();

    // g is u-independent here (H4), so G_kj = tau(t) p <s e_j, e_k>.
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(J));
    if (!model.g.is_zero()) {
        std::vector<double> w(grid.nodes());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = grid.weight(i) * model.g.eval(t, grid.x(i), 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const auto ek = basis.efunc(k);
            for (std::size_t j = 0; j < J; ++j) {
                const auto ej = basis.efunc(j);
                double acc = 0.0;
                for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * ej[i] * ek[i];
                G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = acc * noise.lambda(j);
            }
        }
    }
    const double sa = noise.theta[0] * model.sigma.eval(t, grid.x_a(), 0.0);
    const double sb = noise.theta[1] * model.sigma.eval(t, grid.x_b(), 0.0);

    I0Covariance out;
    out.t = t;
    out.K = K;
    out.C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    const Eigen::MatrixXd GG = G * G.transpose();
    for (std::size_t k = 1; k < K; ++k) {
        for (std::size_t l = 1; l < K; ++l) {
            const auto ki = static_cast<Eigen::Index>(k);
            const auto li = static_cast<Eigen::Index>(l);
            const double q = GG(ki, li) + sa * sa * basis.trace_a(k) * basis.trace_a(l) +
                             sb * sb * basis.trace_b(k) * basis.trace_b(l);
            out.C(ki, li) = q / (basis.alpha(k) + basis.alpha(l));
        }
    }
    return out;
}

std::vector<double> z_field(const SpdePath& spde, const ScalarPath& averaged,
                            const SpectralBasis& basis, double eps) {
    if (spde.K != basis.modes()) throw ConfigError("SPDE path and basis disagree on K");
    if (spde.times.size() != averaged.times.size())
        throw ConfigError("SPDE and averaged paths have different time grids");
    for (std::size_t n = 0; n < spde.times.size(); ++n) {
        if (std::abs(spde.times[n] - averaged.times[n]) > 1e-12 * (1.0 + spde.times[n]))
            throw ConfigError("SPDE and averaged paths have different time grids");
    }
    std::vector<double> ones(basis.grid().nodes(), 1.0);
    const auto one = basis.project(ones);
    const double s = 1.0 / std::sqrt(eps);
    std::vector<double> z(spde.modes.size());
    for (std::size_t n = 0; n < spde.times.size(); ++n) {
        const auto u = spde.at(n);
        for (std::size_t k = 0; k < spde.K; ++k)
            z[n * spde.K + k] = (u[k] - averaged.values[n] * one[k]) * s;
    }
    return z;
}

double bonferroni_z(double level, std::size_t tests) {
    if (!(level > 0.0 && level < 1.0) || tests == 0) throw ConfigError("bad significance level");
    const boost::math::normal_distribution<double> normal;
    return boost::math::quantile(boost::math::complement(normal, level / (2.0 * static_cast<double>(tests))));
}

GaussianReport gaussian_compare(const Eigen::MatrixXd& samples, const I0Covariance& cov,
                                const ComparisonThresholds& thresholds) {
    const auto M = samples.rows();
    const auto m = samples.cols();
    if (M < 500) throw ConfigError("Gaussian comparison needs at least 500 samples");
    if (m < 1 || static_cast<std::size_t>(m) + 1 > cov.K)
        throw ConfigError("sample columns exceed the covariance size");
    const Eigen::MatrixXd C = cov.centered().topLeftCorner(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (!(C(k, k) > 0.0)) throw ConfigError("analytic covariance has a non-positive diagonal");
    }

    const Eigen::RowVectorXd mean = samples.colwise().mean();
    const Eigen::MatrixXd X = samples.rowwise() - mean;
    const double Md = static_cast<double>(M);
    const Eigen::MatrixXd Cemp = (X.transpose() * X) / (Md - 1.0);

    GaussianReport rep;
    rep.samples = static_cast<std::size_t>(M);
    rep.covariance_ok = true;
    double disc = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index l = k; l < m; ++l) {
            const double scale = std::sqrt(C(k, k) * C(l, l));
            const double err = std::abs(Cemp(k, l) - C(k, l)) / scale;
            disc += err;
            ++pairs;
            const double sd = std::sqrt((C(k, k) * C(l, l) + C(k, l) * C(k, l)) / Md);
            rep.max_cov_z = std::max(rep.max_cov_z, std::abs(Cemp(k, l) - C(k, l)) / sd);
            if (k != l) rep.max_offdiag_err = std::max(rep.max_offdiag_err, err);
            if (err > thresholds.cov_rel_tol) rep.covariance_ok = false;
        }
    }
    rep.discrepancy = disc / static_cast<double>(pairs);

    rep.means_ok = true;
    for (Eigen::Index k = 0; k < m; ++k) {
        ModeComparison mc;
        mc.mode = static_cast<std::size_t>(k) + 1;
        mc.c_analytic = C(k, k);
        mc.c_empirical = Cemp(k, k);
        mc.rel_err = std::abs(Cemp(k, k) - C(k, k)) / C(k, k);
        mc.mean = mean(k);
        mc.mean_z = mean(k) / std::sqrt(Cemp(k, k) / Md);
        const auto col = X.col(k).array();
        const double m2 = col.square().mean();
        mc.skew = col.cube().mean() / std::pow(m2, 1.5);
        mc.excess_kurtosis = col.square().square().mean() / (m2 * m2) - 3.0;
        if (std::abs(mc.mean_z) > thresholds.mean_z_max) rep.means_ok = false;
        rep.normality_z = std::max({rep.normality_z, std::abs(mc.skew) / std::sqrt(6.0 / Md),
                                    std::abs(mc.excess_kurtosis) / std::sqrt(24.0 / Md)});
        rep.modes.push_back(mc);
    }
    rep.normality_ok = rep.normality_z <= bonferroni_z(thresholds.level, 2 * static_cast<std::size_t>(m));
    return rep;
}

Eigen::MatrixXd sample_gaussian(const I0Covariance& cov, std::size_t m, std::size_t samples,
                                std::uint64_t seed) {
    if (m == 0 || m + 1 > cov.K) throw ConfigError("requested modes exceed the covariance size");
    const auto mi = static_cast<Eigen::Index>(m);
    const Eigen::MatrixXd C = cov.centered().topLeftCorner(mi, mi);
    const Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    NormalStream rng(seed);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(samples), mi);
    Eigen::VectorXd z(mi);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (Eigen::Index k = 0; k < mi; ++k) z(k) = rng.next();
        out.row(r) = (L * z).transpose();
    }
    return out;
}

}  // namespace fastavg
