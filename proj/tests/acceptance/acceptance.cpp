// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only if all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fastavg/averaged.hpp"
#include "fastavg/config.hpp"
#include "fastavg/experiments.hpp"
#include "fastavg/fd.hpp"
#include "fastavg/neumann.hpp"
#include "fastavg/spde.hpp"
#include "oracles.hpp"

using namespace fastavg;
namespace fs = std::filesystem;

namespace {

fs::path g_configs;

// Dense FEM generalized eigensolve (4096 linear elements) for a = 1 + 0.5 sin x on [0, pi].
constexpr double kFemAlphas[8] = {
    -1.3410050590354935e-10, 1.4179029007434862, 5.317317019280086,  11.835367657851554,
    20.962732435191107,      32.698499807526638, 47.042448714597029, 63.994509776003056,
};
// sqrt(pi + 2) / pi
constexpr double kPhiUnit = 0.72177022207103159;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double simpson_samples(std::span<const double> f, double h) {
    double s = f.front() + f.back();
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

ExperimentConfig load(const std::string& name) { return ExperimentConfig::load(g_configs / name); }

Outcome spectral() {
    const EllipticOperator1D flat(0.0, M_PI, Field::constant(1.0));
    const auto a = eigensolve(flat, 8, 1024);
    double exact_err = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
        exact_err = std::max(exact_err, std::abs(a.alpha(k) - double(k * k)));
        const double c = k == 0 ? std::sqrt(1.0 / M_PI) : std::sqrt(2.0 / M_PI);
        const auto e = a.efunc(k);
        for (std::size_t i = 0; i < e.size(); ++i)
            exact_err = std::max(exact_err, std::abs(e[i] - c * std::cos(double(k) * a.grid().x(i))));
    }
    const auto n = eigensolve(EllipticOperator1D(0.0, M_PI, Field::space_sin(1.0, 0.5, 1.0)), 8, 1024);
    double rel = 0.0;
    for (std::size_t k = 1; k < 8; ++k) rel = std::max(rel, std::abs(n.alpha(k) - kFemAlphas[k]) / kFemAlphas[k]);
    const double flat_mode = std::abs(n.alpha(0));
    return {a.analytic() && exact_err < 1e-13 && rel < 1e-4 && flat_mode < 1e-8,
            "analytic max err " + fmt(exact_err) + ", numeric max rel err " + fmt(rel) + " (< 1e-4), |alpha_0| " + fmt(flat_mode)};
}

Outcome adjoint() {
    const EllipticOperator1D op(0.0, M_PI, Field::constant(1.0));
    const std::size_t n = 4096;
    const auto b = eigensolve(op, 21, n);
    const double h = b.grid().h();
    double worst = 0.0;
    for (double delta : {1.0, 2.0, 5.0}) {
        for (const BoundaryData bd : {BoundaryData{1.0, 0.0}, BoundaryData{0.3, -1.2}}) {
            const auto sol = solve_neumann(op, delta, bd, n, NeumannBranch::analytic);
            std::vector<double> prod(sol.values.size());
            for (std::size_t k = 0; k <= 20; ++k) {
                const auto e = b.efunc(k);
                for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = sol.values[i] * e[i];
                worst = std::max(worst, std::abs(simpson_samples(prod, h) - adjoint_mode_coeff(b, delta, bd, k)));
            }
        }
    }
    return {worst < 1e-6, "max |<N h, e_k> - coeff| " + fmt(worst) + " over k <= 20, delta in {1, 2, 5} (< 1e-6)"};
}

Outcome boundary_ou() {
    const std::size_t K = 4, M = 5000, steps = 1000;
    const double dt = 1e-3;
    const EllipticOperator1D op(0.0, M_PI, Field::constant(1.0));
    const auto b = eigensolve(op, K, 64);
    const ModelSpec model{Field(), Field(), Field::constant(1.0)};
    NoiseSpec spec;
    spec.modes = K;
    spec.seed = 314159;
    bool ok = true;
    std::string detail;
    for (double eps : {1.0, 0.1}) {
        SpdeConfig cfg;
        cfg.eps = eps;
        cfg.horizon = 1.0;
        cfg.dt = dt;
        cfg.u0.assign(K, 0.0);
        const SpdeSolver s(b, model, cfg);
        std::vector<double> x(M);
        for (std::size_t r = 0; r < M; ++r)
            s.run(sample_path(spec, dt, steps, r), [&](std::size_t, double, std::span<const double> u) { x[r] = u[1]; });
        double m2 = 0.0, m4 = 0.0;
        for (double v : x) {
            m2 += v * v / double(M);
            m4 += v * v * v * v / double(M);
        }
        const double target = oracle::ou_variance(1.0 / eps, std::sqrt(4.0 / M_PI), 1.0);
        const double se = std::sqrt((m4 - m2 * m2) / double(M));
        const double z = (m2 - target) / se;
        ok = ok && std::abs(z) < 5.0;
        detail += "eps " + fmt(eps) + ": var " + fmt(m2) + " vs " + fmt(target) + " (z " + fmt(z) + "); ";
    }
    detail += "|z| < 5";
    return {ok, detail};
}

Outcome bounds() {
    const auto rep = run_bound(load("bound.json"));
    const bool ok = rep.finite && rep.rows.size() == 9 && rep.boundary_ratio < 10.0 && rep.solution_ratio < 10.0;
    return {ok, "max/min over 9 eps: boundary OU " + fmt(rep.boundary_ratio) + ", solution " + fmt(rep.solution_ratio) + " (< 10)"};
}

Outcome rate() {
    const auto rep = run_converge(load("converge.json"));
    bool strict = true;
    for (std::size_t i = 1; i < rep.rms.size(); ++i) strict = strict && rep.rms[i] < rep.rms[i - 1];
    const bool ok = rep.failures.empty() && strict && rep.fit.slope >= 0.35 && rep.fit.slope <= 0.65;
    return {ok, "slope " + fmt(rep.fit.slope) + " in [0.35, 0.65], r2 " + fmt(rep.fit.r2) + ", strictly decreasing " +
                    (strict ? "yes" : "no") + ", failed replicas " + std::to_string(rep.failures.size())};
}

Outcome law() {
    const std::size_t K = 8, M = 5000, steps = 1000;
    const double dt = 1e-3;
    const EllipticOperator1D op(0.0, M_PI, Field::constant(1.0));
    NoiseSpec spec;
    spec.modes = K;
    spec.seed = 2718;
    const auto b = eigensolve(op, K, 256);
    const auto m = invariant_density(op, 256);
    const AveragedModel unit({Field(), Field::constant(1.0), Field::constant(1.0)}, b, m, op, spec);
    const double phi_err = std::abs(unit.phi(0.0, 0.0) - kPhiUnit);

    const AveragedModel avg({Field::relaxation(1.0, 0.5), Field::constant(1.0), Field::constant(1.0)}, b, m, op, spec);
    std::vector<double> c(M), l(M);
    for (std::size_t r = 0; r < M; ++r) {
        c[r] = integrate_coupled(avg, 1.0, sample_path(spec, dt, steps, r)).values.back();
        l[r] = integrate_law(avg, 1.0, dt, sample_scalar_increments(spec.seed + 1000003 + r, dt, steps)).values.back();
    }
    auto stats = [&](const std::vector<double>& x) {
        double mean = 0.0, var = 0.0, m4 = 0.0;
        for (double v : x) mean += v / double(M);
        for (double v : x) {
            var += (v - mean) * (v - mean) / double(M - 1);
            m4 += std::pow(v - mean, 4) / double(M);
        }
        return std::array<double, 3>{mean, var, m4};
    };
    const auto sc = stats(c), sl = stats(l);
    const double z_mean = (sc[0] - sl[0]) / std::sqrt((sc[1] + sl[1]) / double(M));
    const double z_var = (sc[1] - sl[1]) / std::sqrt((sc[2] - sc[1] * sc[1] + sl[2] - sl[1] * sl[1]) / double(M));
    const bool ok = phi_err < 1e-5 && std::abs(z_mean) < 5.0 && std::abs(z_var) < 5.0;
    return {ok, "Phi " + fmt(unit.phi(0.0, 0.0)) + " vs " + fmt(kPhiUnit) + " (err " + fmt(phi_err) +
                    "), coupled vs Phi-form at T=1: mean z " + fmt(z_mean) + ", var z " + fmt(z_var) + " (< 5)"};
}

Outcome fluctuation() {
    const auto rep = run_fluctuate(load("fluctuate_additive.json"));
    double worst = 0.0;
    for (const auto& mc : rep.primary.modes) worst = std::max(worst, mc.rel_err);
    worst = std::max(worst, rep.primary.max_offdiag_err);
    const bool ok = rep.primary.covariance_ok && rep.primary.means_ok && rep.trend_ok;
    return {ok, "eps 1e-3, M " + std::to_string(rep.primary.samples) + ": max cov err " + fmt(worst) + " (< 0.15), means " +
                    (rep.primary.means_ok ? "ok" : "off") + "; discrepancy eps 1e-2 " + fmt(rep.discrepancy.front()) +
                    " > eps 1e-3 " + fmt(rep.discrepancy.back())};
}

Outcome cross_solver() {
    const std::size_t K = 64, N = 256;
    const double dt = 1e-5, eps = 0.1, T = 1.0;
    const EllipticOperator1D op(0.0, M_PI, Field::constant(1.0));
    const ModelSpec model{Field::relaxation(1.0, 0.5), Field::constant(0.5), Field::constant(0.5)};
    const auto b = eigensolve(op, K, N);
    NoiseSpec spec;
    spec.modes = K;
    spec.seed = 8080;
    const auto noise = sample_path(spec, dt, std::size_t(std::llround(T / dt)));

    SpdeConfig sc;
    sc.eps = eps;
    sc.horizon = T;
    sc.dt = dt;
    sc.u0 = project_initial(b, Field::constant(1.0));
    const SpdeSolver spde(b, model, sc);
    std::vector<double> last;
    spde.run(noise, [&](std::size_t, double, std::span<const double> u) { last.assign(u.begin(), u.end()); });
    const auto spectral_grid = b.synthesize(last);

    FdConfig fc;
    fc.grid_n = N;
    fc.dt = dt;
    fc.eps = eps;
    fc.horizon = T;
    fc.record_every = 1u << 30;
    const FdSolver fd(op, model, fc);
    const std::vector<double> u0(N + 1, 1.0);
    const auto traj = fd.integrate(u0, noise, b);
    std::vector<double> diff(N + 1), sq(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        diff[i] = (spectral_grid[i] - traj.back()[i]) * (spectral_grid[i] - traj.back()[i]);
        sq[i] = spectral_grid[i] * spectral_grid[i];
    }
    const double rel = std::sqrt(b.grid().integrate(diff) / b.grid().integrate(sq));
    return {rel <= 0.02, "relative H-norm difference at T=1, eps 0.1: " + fmt(rel) + " (<= 0.02)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "fastavg_acceptance_determinism";
    fs::remove_all(root);
    auto conv = load("converge.json");
    conv.experiment.replicas = 6;
    conv.disc.dt = 1e-3;
    conv.experiment.eps_ladder = {0.25, 0.0625, 0.015625};
    const std::vector<std::pair<std::string, ExperimentConfig>> runs{
        {"converge", conv}, {"simulate", load("simulate.json")}, {"eigen", load("eigen.json")},
        {"selftest", load("fluctuate_selftest.json")}};
    std::size_t files = 0, mismatched = 0;
    for (const auto& [name, cfg] : runs) {
        run_experiment(cfg, {root / (name + "_a"), 1, std::nullopt});
        run_experiment(cfg, {root / (name + "_b"), 2, std::nullopt});
        for (const auto& entry : fs::recursive_directory_iterator(root / (name + "_a"))) {
            if (!entry.is_regular_file()) continue;
            ++files;
            const auto twin = root / (name + "_b") / fs::relative(entry.path(), root / (name + "_a"));
            if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) ++mismatched;
        }
    }
    fs::remove_all(root);
    return {files > 0 && mismatched == 0,
            std::to_string(files) + " CSV files compared across reruns (1 vs 2 threads), " + std::to_string(mismatched) +
                " differ"};
}

}  // namespace

int main(int argc, char** argv) {
    g_configs = argc > 1 ? fs::path(argv[1]) : fs::path(FASTAVG_CONFIG_DIR);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"spectral eigenpairs", spectral},
        {"adjoint Neumann identity", adjoint},
        {"boundary OU moments", boundary_ou},
        {"uniform-in-eps bounds", bounds},
        {"averaging rate", rate},
        {"law equivalence and Phi", law},
        {"fluctuation limit", fluctuation},
        {"spectral vs finite differences", cross_solver},
        {"determinism", determinism},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && o.pass;
        std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
