#include <cmath>

#include <gtest/gtest.h>

#include "fastavg/error.hpp"
#include "fastavg/fd.hpp"
#include "fastavg/spde.hpp"

using namespace fastavg;

namespace {

const EllipticOperator1D kOp(0.0, M_PI, Field::constant(1.0));

FdConfig fd_config(std::size_t n, double dt, double eps, double T, double theta = 0.5) {
    FdConfig c;
    c.grid_n = n;
    c.dt = dt;
    c.eps = eps;
    c.horizon = T;
    c.theta = theta;
    return c;
}

BoundaryData no_flux(double) { return {0.0, 0.0}; }

}  // namespace

TEST(Fd, HeatEquationCosine) {
    const FdSolver fd(kOp, ModelSpec{}, fd_config(200, 1e-3, 1.0, 1.0));
    std::vector<double> u0(201);
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = std::cos(fd.grid().x(i));
    const auto traj = fd.integrate(u0, FluxFunction(no_flux));
    for (std::size_t i = 0; i < u0.size(); ++i) EXPECT_NEAR(traj.back()[i], std::exp(-1.0) * u0[i], 1e-4);
}

TEST(Fd, ConstantFluxRelaxesToNeumannMap) {
    const double delta = 1.0;
    const ModelSpec model{Field::relaxation(delta, 0.0), Field(), Field()};
    const FdSolver fd(kOp, model, fd_config(512, 1e-2, 1.0, 30.0, 1.0));
    const std::vector<double> u0(513, 0.0);
    const auto traj = fd.integrate(u0, FluxFunction([](double) { return BoundaryData{1.0, 0.0}; }));
    const auto ref = solve_neumann(kOp, delta, {1.0, 0.0}, 512);
    for (std::size_t i = 0; i < u0.size(); ++i) EXPECT_NEAR(traj.back()[i], ref.values[i], 1e-4);
}

TEST(Fd, DriftSteadyStateMatchesNumericNeumann) {
    const EllipticOperator1D op(0.0, 1.0, Field::space_sin(1.0, 0.5, 2.0), Field::constant(1.0));
    const ModelSpec model{Field::relaxation(2.0, 0.0), Field(), Field()};
    const FdSolver fd(op, model, fd_config(256, 1e-2, 1.0, 20.0, 1.0));
    const std::vector<double> u0(257, 0.0);
    const auto traj = fd.integrate(u0, FluxFunction([](double) { return BoundaryData{0.5, 1.0}; }));
    const auto ref = solve_neumann(op, 2.0, {0.5, 1.0}, 256, NeumannBranch::numeric);
    for (std::size_t i = 0; i < u0.size(); ++i) EXPECT_NEAR(traj.back()[i], ref.values[i], 1e-6);
}

TEST(Fd, ZeroStaysZero) {
    const FdSolver fd(kOp, ModelSpec{}, fd_config(64, 1e-2, 0.1, 1.0));
    const std::vector<double> u0(65, 0.0);
    for (double v : fd.integrate(u0, FluxFunction(no_flux)).back()) EXPECT_EQ(v, 0.0);
}

TEST(Fd, RecordEveryKeepsFinalLevel) {
    auto cfg = fd_config(32, 0.1, 1.0, 1.0);
    cfg.record_every = 3;
    const FdSolver fd(kOp, ModelSpec{}, cfg);
    const auto traj = fd.integrate(std::vector<double>(33, 1.0), FluxFunction(no_flux));
    EXPECT_EQ(traj.times.size(), 5u);
    EXPECT_NEAR(traj.times.back(), 1.0, 1e-14);
}

TEST(Fd, StochasticRunConservesMassWithoutNoise) {
    const auto b = eigensolve(kOp, 16, 64);
    NoiseSpec spec;
    spec.modes = 16;
    spec.theta = {0.0, 0.0};
    const FdSolver fd(kOp, ModelSpec{}, fd_config(64, 1e-3, 0.1, 0.5));
    std::vector<double> u0(65);
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = 1.0 + std::cos(3.0 * fd.grid().x(i));
    const auto traj = fd.integrate(u0, sample_path(spec, 1e-3, 500), b);
    EXPECT_NEAR(fd.grid().integrate(traj.back()), fd.grid().integrate(u0), 1e-12);
}

TEST(Fd, Rejections) {
    EXPECT_THROW(FdSolver(kOp, ModelSpec{}, fd_config(64, 1e-2, 1.0, 1.0, 0.3)), ConfigError);
    const EllipticOperator1D drift(0.0, 1.0, Field::constant(1.0), Field::constant(1.0));
    const FdSolver fd(drift, ModelSpec{}, fd_config(64, 1e-2, 1.0, 1.0));
    const auto b = eigensolve(kOp, 4, 64);
    NoiseSpec spec;
    spec.modes = 4;
    EXPECT_THROW(fd.integrate(std::vector<double>(65, 0.0), sample_path(spec, 1e-2, 100), b), ConfigError);
    EXPECT_THROW(FdSolver(EllipticOperator1D(0.0, 1.0, Field::affine(0.0, 0.0) + Field::space_sin(0.0, 1.0, 3.0)),
                          ModelSpec{}, fd_config(64, 1e-2, 1.0, 1.0)),
                 EllipticityViolation);
}
