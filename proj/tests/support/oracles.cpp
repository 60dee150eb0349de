#include "oracles.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {

std::vector<double> fem_eigenvalues(const Fn& a, double x_a, double x_b, std::size_t n,
                                    std::size_t modes) {
    const auto N = static_cast<Eigen::Index>(n + 1);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    const double h = (x_b - x_a) / static_cast<double>(n);
    const std::array<double, 3> gx{-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const std::array<double, 3> gw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    for (Eigen::Index e = 0; e < N - 1; ++e) {
        const double xl = x_a + static_cast<double>(e) * h;
        double abar = 0.0;
        for (int q = 0; q < 3; ++q) abar += 0.5 * gw[q] * a(xl + 0.5 * h * (1.0 + gx[q]));
        const double k = abar / h;
        K(e, e) += k;
        K(e + 1, e + 1) += k;
        K(e, e + 1) -= k;
        K(e + 1, e) -= k;
        M(e, e) += h / 3.0;
        M(e + 1, e + 1) += h / 3.0;
        M(e, e + 1) += h / 6.0;
        M(e + 1, e) += h / 6.0;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
    std::vector<double> out(modes);
    for (std::size_t k = 0; k < modes; ++k) out[k] = solver.eigenvalues()(static_cast<Eigen::Index>(k));
    return out;
}

namespace {

using State = std::array<double, 2>;

// Classical RK4 for a 2-vector on n * refine uniform steps; returns the state at the n+1 cell nodes.
template <typename F>
std::vector<State> rk4_nodes(F&& rhs, double x_a, double x_b, State y, std::size_t n, std::size_t refine) {
    const std::size_t steps = n * refine;
    const double h = (x_b - x_a) / static_cast<double>(steps);
    auto axpy = [](const State& p, const State& q, double s) { return State{p[0] + s * q[0], p[1] + s * q[1]}; };
    std::vector<State> out{y};
    for (std::size_t i = 0; i < steps; ++i) {
        const double xs = x_a + static_cast<double>(i) * h;
        const auto k1 = rhs(xs, y);
        const auto k2 = rhs(xs + 0.5 * h, axpy(y, k1, 0.5 * h));
        const auto k3 = rhs(xs + 0.5 * h, axpy(y, k2, 0.5 * h));
        const auto k4 = rhs(xs + h, axpy(y, k3, h));
        for (int c = 0; c < 2; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        if ((i + 1) % refine == 0) out.push_back(y);
    }
    return out;
}

}  // namespace

std::vector<double> neumann_shooting(const Fn& a, double x_a, double x_b, double delta,
                                     double h_a, double h_b, std::size_t n, std::size_t refine) {
    // State (v, p) with p = a v'; v' = p / a, p' = delta v.
    auto rhs = [&](double s, const State& y) { return State{y[1] / a(s), delta * y[0]}; };
    const auto y0 = rk4_nodes(rhs, x_a, x_b, {0.0, -h_a}, n, refine).back();
    const auto y1 = rk4_nodes(rhs, x_a, x_b, {1.0, 0.0}, n, refine).back();
    // p(x_b) = y0.p + s * y1.p must equal h_b.
    const double s = (h_b - y0[1]) / y1[1];
    const auto path = rk4_nodes(rhs, x_a, x_b, {s, -h_a}, n, refine);
    std::vector<double> out(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) out[i] = path[i][0];
    return out;
}

std::vector<double> stationary_density(const Fn& a, const Fn& b, double x_a, double x_b,
                                       std::size_t n, std::size_t refine) {
    // (m, running integral of m) from m' = (b / a) m.
    auto rhs = [&](double s, const State& y) { return State{b(s) / a(s) * y[0], y[0]}; };
    const auto path = rk4_nodes(rhs, x_a, x_b, {1.0, 0.0}, n, refine);
    const double total = path.back()[1];
    std::vector<double> out(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) out[i] = path[i][0] / total;
    return out;
}

double ou_variance(double k, double s, double t) {
    if (k == 0.0) return s * s * t;
    return s * s * (-std::expm1(-2.0 * k * t)) / (2.0 * k);
}

double simpson(const Fn& f, double lo, double hi, std::size_t n) {
    if (n % 2) ++n;
    const double h = (hi - lo) / static_cast<double>(n);
    double acc = f(lo) + f(hi);
    for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + static_cast<double>(i) * h);
    return acc * h / 3.0;
}

}  // namespace oracle
