#include <cmath>

#include <gtest/gtest.h>

#include "fastavg/averaged.hpp"
#include "fastavg/error.hpp"
#include "fastavg/spde.hpp"
#include "oracles.hpp"

using namespace fastavg;

namespace {

const EllipticOperator1D kOp(0.0, M_PI, Field::constant(1.0));

SpdeConfig make_config(std::size_t K, double eps, double T, double dt, std::vector<double> u0 = {}) {
    SpdeConfig c;
    c.eps = eps;
    c.horizon = T;
    c.dt = dt;
    c.u0 = u0.empty() ? std::vector<double>(K, 0.0) : std::move(u0);
    return c;
}

NoisePath noise_for(std::size_t K, double dt, std::size_t steps, std::uint64_t seed) {
    NoiseSpec spec;
    spec.modes = K;
    spec.seed = seed;
    return sample_path(spec, dt, steps);
}

}  // namespace

TEST(Spde, PureSemigroupStep) {
    const auto b = eigensolve(kOp, 6, 64);
    std::vector<double> u0(6, 0.0);
    u0[1] = 1.0;
    const SpdeSolver s(b, ModelSpec{}, make_config(6, 0.5, 0.01, 0.01, u0));
    const std::vector<double> zero(6, 0.0), zb(2, 0.0);
    const auto u = s.step(u0, 0.0, zero, zb);
    EXPECT_NEAR(u[1], std::exp(-0.01 / 0.5), 1e-15);
    for (std::size_t k = 0; k < 6; ++k) {
        if (k != 1) EXPECT_EQ(u[k], 0.0);
    }
}

TEST(Spde, ConstantsAreInvariant) {
    const auto b = eigensolve(kOp, 8, 64);
    const auto u0 = project_initial(b, Field::constant(2.5));
    const SpdeSolver s(b, ModelSpec{}, make_config(8, 0.1, 0.5, 0.01, u0));
    const auto path = s.integrate(noise_for(8, 0.01, 50, 1));
    for (std::size_t n = 0; n < path.times.size(); ++n) {
        const auto grid = b.synthesize(path.at(n));
        for (double v : grid) EXPECT_NEAR(v, 2.5, 1e-13);
    }
}

TEST(Spde, LinearDecayMatchesOdeToFirstOrder) {
    const auto b = eigensolve(kOp, 8, 64);
    const double c = 1.5, dt = 1e-3;
    const auto u0 = project_initial(b, Field::constant(c));
    const SpdeSolver s(b, ModelSpec{Field::relaxation(1.0, 0.0), Field(), Field()}, make_config(8, 0.2, 1.0, dt, u0));
    const auto path = s.integrate(noise_for(8, dt, 1000, 2));
    double worst = 0.0;
    for (std::size_t n = 0; n < path.times.size(); ++n) {
        const double v = path.at(n)[0] / std::sqrt(M_PI);
        worst = std::max(worst, std::abs(v - c * std::exp(-path.times[n])));
    }
    EXPECT_LT(worst, c * dt);
    EXPECT_GT(worst, 0.05 * c * dt);
}

TEST(Spde, BoundaryOuVarianceMatchesClosedForm) {
    const std::size_t K = 4, M = 5000;
    const auto b = eigensolve(kOp, K, 64);
    const ModelSpec model{Field(), Field(), Field::constant(1.0)};
    for (double eps : {1.0, 0.1}) {
        for (bool exact : {false, true}) {
            auto cfg = make_config(K, eps, 1.0, 1e-3);
            cfg.exact_variance = exact;
            const SpdeSolver s(b, model, cfg);
            NoiseSpec spec;
            spec.modes = K;
            spec.seed = 1000;
            double s2 = 0.0;
            for (std::size_t r = 0; r < M; ++r) {
                double last = 0.0;
                s.run(sample_path(spec, 1e-3, 1000, r), [&](std::size_t, double, std::span<const double> u) { last = u[1]; });
                s2 += last * last;
            }
            const double var = s2 / double(M);
            const double target = oracle::ou_variance(1.0 / eps, std::sqrt(4.0 / M_PI), 1.0);
            EXPECT_NEAR(target, (2.0 / M_PI) * eps * (1.0 - std::exp(-2.0 / eps)), 1e-14);
            EXPECT_LT(std::abs(var - target), 5.0 * target * std::sqrt(2.0 / double(M))) << eps << " " << exact;
        }
    }
}

TEST(Spde, ModeZeroIncrementIsTheAveragedBoundaryKick) {
    const std::size_t K = 8;
    const auto b = eigensolve(kOp, K, 128);
    const auto m = invariant_density(kOp, 128);
    const double sigma = 0.7;
    NoiseSpec spec;
    spec.modes = K;
    spec.theta = {0.4, 1.3};
    spec.seed = 9;
    const ModelSpec model{Field(), Field(), Field::constant(sigma)};
    const SpdeSolver s(b, model, make_config(K, 0.01, 0.1, 1e-3));
    const AveragedModel avg(model, b, m, kOp, spec);
    const auto noise = sample_path(spec, 1e-3, 100);
    const auto path = s.integrate(noise);
    const auto sh = avg.sigmahat(0.0);
    for (std::size_t n = 0; n < 100; ++n) {
        const double inc = path.at(n + 1)[0] - path.at(n)[0];
        const auto dB = noise.dB(n);
        EXPECT_NEAR(inc, sigma * (dB[0] + dB[1]) / std::sqrt(M_PI), 1e-14);
        EXPECT_NEAR(inc, std::sqrt(M_PI) * (sh[0] * dB[0] + sh[1] * dB[1]), 1e-14);
    }
}

TEST(Spde, ProjectedAndGridQuadratureAgree) {
    const std::size_t K = 16;
    const auto b = eigensolve(EllipticOperator1D(0.0, 2.0, Field::space_sin(1.0, 0.3, 2.0)), K, 256);
    const ModelSpec additive{Field::relaxation(2.0, 0.5) * Field::space_sin(1.0, 0.5, 3.0) * Field::time_sin(0.5, 4.0) +
                                 Field::space_sin(0.0, 1.0, 1.0),
                             Field::space_sin(0.5, 0.2, 1.0) * Field::time_sin(0.3, 1.0) + Field::constant(0.1),
                             Field::time_sin(0.5, 2.0)};
    const auto noise = noise_for(K, 1e-3, 200, 4);
    auto cfg = make_config(K, 0.05, 0.2, 1e-3, project_initial(b, Field::space_sin(1.0, 1.0, 1.0)));
    const auto p1 = SpdeSolver(b, additive, cfg).integrate(noise);
    cfg.quadrature = Quadrature::grid;
    const auto p2 = SpdeSolver(b, additive, cfg).integrate(noise);
    for (std::size_t i = 0; i < p1.modes.size(); ++i) EXPECT_NEAR(p1.modes[i], p2.modes[i], 1e-11);
}

TEST(Spde, MultiplicativeNoiseUsesGridPath) {
    const std::size_t K = 8;
    const auto b = eigensolve(kOp, K, 64);
    const ModelSpec model{Field::relaxation(1.0, 0.0), Field::affine(0.5, 0.2), Field::constant(0.3)};
    auto cfg = make_config(K, 0.1, 0.1, 1e-3, project_initial(b, Field::constant(1.0)));
    const SpdeSolver s(b, model, cfg);
    const auto path = s.integrate(noise_for(K, 1e-3, 100, 5));
    for (double v : path.modes) EXPECT_TRUE(std::isfinite(v));
    cfg.exact_variance = true;
    EXPECT_THROW(SpdeSolver(b, model, cfg), ConfigError);
}

TEST(Spde, LinearGaussianMarginalsHaveNoSkew) {
    const std::size_t K = 4, M = 2000;
    const auto b = eigensolve(kOp, K, 64);
    const ModelSpec model{Field::relaxation(1.0, 0.0), Field::constant(0.5), Field::constant(0.5)};
    const SpdeSolver s(b, model, make_config(K, 0.1, 0.5, 1e-3));
    NoiseSpec spec;
    spec.modes = K;
    spec.seed = 77;
    std::vector<double> x(M);
    for (std::size_t r = 0; r < M; ++r) {
        s.run(sample_path(spec, 1e-3, 500, r), [&](std::size_t, double, std::span<const double> u) { x[r] = u[2]; });
    }
    double mean = 0.0;
    for (double v : x) mean += v / double(M);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        m2 += (v - mean) * (v - mean) / double(M);
        m3 += std::pow(v - mean, 3) / double(M);
    }
    EXPECT_LT(std::abs(m3 / std::pow(m2, 1.5)), 4.0 * std::sqrt(6.0 / double(M)));
}

TEST(Spde, DeterministicGivenNoise) {
    const std::size_t K = 8;
    const auto b = eigensolve(kOp, K, 64);
    const ModelSpec model{Field::relaxation(1.0, 0.2), Field::constant(0.5), Field::constant(0.5)};
    const SpdeSolver s(b, model, make_config(K, 0.01, 0.1, 1e-3, project_initial(b, Field::constant(1.0))));
    const auto noise = noise_for(K, 1e-3, 100, 6);
    EXPECT_EQ(s.integrate(noise).modes, s.integrate(noise).modes);
}

TEST(Spde, BlowUpReportsStep) {
    const std::size_t K = 4;
    const auto b = eigensolve(kOp, K, 64);
    const ModelSpec model{Field::relaxation(3000.0, 0.0), Field(), Field()};
    const SpdeSolver s(b, model, make_config(K, 1.0, 2.0, 1e-3, project_initial(b, Field::constant(1.0))));
    try {
        s.integrate(noise_for(K, 1e-3, 2000, 1));
        FAIL() << "expected IntegrationFailure";
    } catch (const IntegrationFailure& e) {
        EXPECT_GT(e.step(), 100u);
        EXPECT_LT(e.step(), 2000u);
    }
}

TEST(Spde, RejectsMismatchedInputs) {
    const std::size_t K = 4;
    const auto b = eigensolve(kOp, K, 64);
    EXPECT_THROW(SpdeSolver(b, ModelSpec{}, make_config(3, 0.1, 1.0, 0.1)), ConfigError);
    EXPECT_THROW(SpdeSolver(b, ModelSpec{}, make_config(K, 0.1, 1.0, 0.3)), ConfigError);
    EXPECT_THROW(SpdeSolver(b, ModelSpec{Field::affine(0.0, 1.0) * Field::affine(0.0, 1.0), Field(), Field()},
                            make_config(K, 0.1, 1.0, 0.1)),
                 HypothesisViolation);
    const SpdeSolver s(b, ModelSpec{}, make_config(K, 0.1, 1.0, 0.1));
    EXPECT_THROW(s.integrate(noise_for(K, 0.1, 5, 1)), ConfigError);
    EXPECT_THROW(s.integrate(noise_for(K + 1, 0.1, 10, 1)), ConfigError);
}
