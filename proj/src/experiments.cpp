#include "fastavg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fastavg/averaged.hpp"
#include "fastavg/csv.hpp"
#include "fastavg/error.hpp"
#include "fastavg/parallel.hpp"
#include "fastavg/spde.hpp"

namespace fastavg {

namespace {

struct Setup {
    EllipticOperator1D op;
    SpectralBasis basis;
    InvariantMeasure measure;
    NoiseSpec noise;
    std::vector<double> u0;
    std::vector<double> one;  // <1, e_k>
    std::size_t steps;
};

Setup make_setup(const ExperimentConfig& cfg, const RunOptions& opts) {
    auto op = cfg.op.build();
    if (!op.divergence_form()) throw ConfigError("stochastic experiments need b = 0");
    auto basis = eigensolve(op, cfg.disc.K, cfg.disc.grid_n);
    auto measure = invariant_density(op, cfg.disc.grid_n);
    NoiseSpec noise = cfg.noise;
    if (opts.seed) noise.seed = *opts.seed;
    auto u0 = project_initial(basis, cfg.disc.u0);
    std::vector<double> ones(basis.grid().nodes(), 1.0);
    auto one = basis.project(ones);
    SpdeConfig probe;
    probe.dt = cfg.disc.dt;
    probe.horizon = cfg.disc.horizon;
    const std::size_t steps = probe.steps();
    return {std::move(op), std::move(basis), std::move(measure), noise, std::move(u0), std::move(one), steps};
}

SpdeConfig spde_config(const ExperimentConfig& cfg, const Setup& s, double eps, bool exact) {
    SpdeConfig c;
    c.eps = eps;
    c.horizon = cfg.disc.horizon;
    c.dt = cfg.disc.dt;
    c.u0 = s.u0;
    c.exact_variance = exact;
    return c;
}

double sq_norm(std::span<const double> u) {
    double acc = 0.0;
    for (double x : u) acc += x * x;
    return acc;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

std::string check_line(bool ok, const std::string& text) { return (ok ? "PASS " : "FAIL ") + text; }

void ensure_dir(const std::filesystem::path& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

void write_report(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& rows) {
    if (dir.empty()) return;
    CsvWriter csv(dir / "report.csv");
    csv.header({"metric", "value"});
    for (const auto& [k, v] : rows) csv.row(std::vector<std::string>{k, v});
}

}  // namespace

RateReport run_converge(const ExperimentConfig& cfg, const RunOptions& opts) {
    const auto s = make_setup(cfg, opts);
    const auto& eps = cfg.experiment.eps_ladder;
    const std::size_t M = cfg.experiment.replicas;
    const std::size_t E = eps.size();
    const double delta = cfg.disc.sup_window_start();
    const double inv_len = 1.0 / s.basis.grid().length();
    const AveragedModel avg(cfg.model, s.basis, s.measure, s.op, s.noise);
    const double v0 = avg.initial_value(cfg.disc.u0);

    std::vector<SpdeSolver> solvers;
    solvers.reserve(E);
    for (double e : eps) solvers.emplace_back(s.basis, cfg.model, spde_config(cfg, s, e, cfg.experiment.exact_variance));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> sup2(M * E, nan);
    std::vector<std::vector<ReplicaFailure>> failures(M);
    parallel_for(M, opts.threads, [&](std::size_t r) {
        // One noise path drives the SPDE at every eps and the averaged equation.
        const auto noise = sample_path(s.noise, cfg.disc.dt, s.steps, r);
        std::vector<double> v;
        try {
            v = integrate_coupled(avg, v0, noise).values;
        } catch (const IntegrationFailure& f) {
            for (double e : eps) failures[r].push_back({e, r, f.step(), f.what()});
            return;
        }
        for (std::size_t i = 0; i < E; ++i) {
            double worst = 0.0;
            try {
                solvers[i].run(noise, [&](std::size_t n, double t, std::span<const double> u) {
                    if (t < delta - 1e-12) return;
                    double acc = 0.0;
                    for (std::size_t k = 0; k < u.size(); ++k) {
                        const double d = u[k] - v[n] * s.one[k];
                        acc += d * d;
                    }
                    worst = std::max(worst, acc * inv_len);
                });
                sup2[r * E + i] = worst;
            } catch (const IntegrationFailure& f) {
                failures[r].push_back({eps[i], r, f.step(), f.what()});
            }
        }
    });

    RateReport rep;
    rep.eps = eps;
    rep.rms.assign(E, nan);
    rep.ok_replicas.assign(E, 0);
    for (std::size_t i = 0; i < E; ++i) {
        double acc = 0.0;
        for (std::size_t r = 0; r < M; ++r) {
            const double x = sup2[r * E + i];
            if (std::isfinite(x)) {
                acc += x;
                ++rep.ok_replicas[i];
            }
        }
        if (rep.ok_replicas[i] > 0) rep.rms[i] = std::sqrt(acc / static_cast<double>(rep.ok_replicas[i]));
    }
    for (auto& f : failures) rep.failures.insert(rep.failures.end(), f.begin(), f.end());

    std::vector<std::size_t> order(E);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return eps[a] > eps[b]; });
    rep.monotone = true;
    for (std::size_t i = 1; i < E; ++i) {
        if (!(rep.rms[order[i]] < rep.rms[order[i - 1]])) rep.monotone = false;
    }
    try {
        rep.fit = fit_loglog(rep.eps, rep.rms);
    } catch (const ConfigError&) {
        rep.fit.slope = nan;
        rep.fit.intercept = nan;
        rep.fit.r2 = nan;
    }

    if (!opts.out_dir.empty()) {
        ensure_dir(opts.out_dir);
        CsvWriter csv(opts.out_dir / "rate.csv");
        csv.header({"eps", "rms_sup_error", "ok_replicas"});
        for (std::size_t i = 0; i < E; ++i)
            csv.row(std::vector<double>{eps[i], rep.rms[i], static_cast<double>(rep.ok_replicas[i])});
        if (!rep.failures.empty()) {
            CsvWriter fcsv(opts.out_dir / "failures.csv");
            fcsv.header({"eps", "replica", "step", "what"});
            for (const auto& f : rep.failures)
                fcsv.row(std::vector<std::string>{format_double(f.eps), std::to_string(f.replica),
                                                  std::to_string(f.step), "\"" + f.what + "\""});
        }
    }
    return rep;
}

BoundReport run_bound(const ExperimentConfig& cfg, const RunOptions& opts) {
    const auto s = make_setup(cfg, opts);
    const auto& eps = cfg.experiment.eps_ladder;
    const std::size_t M = cfg.experiment.replicas;
    const std::size_t E = eps.size();

    const ModelSpec boundary_only{Field(), Field(), cfg.model.sigma};
    std::vector<SpdeSolver> ou, full;
    for (double e : eps) {
        auto c = spde_config(cfg, s, e, false);
        full.emplace_back(s.basis, cfg.model, c);
        c.u0.assign(s.basis.modes(), 0.0);
        ou.emplace_back(s.basis, boundary_only, c);
    }

    std::vector<double> w_sup(M * E), u_sup(M * E);
    parallel_for(M, opts.threads, [&](std::size_t r) {
        const auto noise = sample_path(s.noise, cfg.disc.dt, s.steps, r);
        for (std::size_t i = 0; i < E; ++i) {
            double w = 0.0, u = 0.0;
            ou[i].run(noise, [&](std::size_t, double, std::span<const double> x) { w = std::max(w, sq_norm(x)); });
            full[i].run(noise, [&](std::size_t, double, std::span<const double> x) { u = std::max(u, sq_norm(x)); });
            w_sup[r * E + i] = w;
            u_sup[r * E + i] = u;
        }
    });

    BoundReport rep;
    for (std::size_t i = 0; i < E; ++i) {
        BoundRow row{eps[i], 0.0, 0.0};
        for (std::size_t r = 0; r < M; ++r) {
            row.boundary_ou += w_sup[r * E + i];
            row.solution += u_sup[r * E + i];
        }
        row.boundary_ou /= static_cast<double>(M);
        row.solution /= static_cast<double>(M);
        rep.finite = rep.finite && std::isfinite(row.boundary_ou) && std::isfinite(row.solution);
        rep.rows.push_back(row);
    }
    auto ratio = [&](double BoundRow::*field) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& row : rep.rows) {
            lo = std::min(lo, row.*field);
            hi = std::max(hi, row.*field);
        }
        if (hi == 0.0) return 1.0;
        return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    };
    rep.boundary_ratio = ratio(&BoundRow::boundary_ou);
    rep.solution_ratio = ratio(&BoundRow::solution);

    if (!opts.out_dir.empty()) {
        ensure_dir(opts.out_dir);
        CsvWriter csv(opts.out_dir / "bound.csv");
        csv.header({"eps", "E_sup_boundary_ou_sq", "E_sup_solution_sq"});
        for (const auto& row : rep.rows) csv.row(std::vector<double>{row.eps, row.boundary_ou, row.solution});
    }
    return rep;
}

FluctuationReport run_fluctuate(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate(cfg.model, Purpose::fluctuate, cfg.disc.horizon).require();
    const auto s = make_setup(cfg, opts);
    const auto& x = cfg.experiment;
    const std::size_t m = x.compare_modes;
    const std::size_t M = x.replicas;
    const ComparisonThresholds thr{x.acceptance.cov_rel_tol, x.acceptance.mean_z_max, x.acceptance.level};

    FluctuationReport rep;
    rep.covariance = i0_covariance(cfg.model, s.basis, s.noise, x.t_eval);

    if (x.selftest) {
        const auto samples = sample_gaussian(rep.covariance, m, M, s.noise.seed);
        rep.primary = gaussian_compare(samples, rep.covariance, thr);
        return rep;
    }

    const std::size_t E = x.eps_ladder.size();
    const std::size_t B = x.batches;
    SpdeConfig probe;
    probe.dt = cfg.disc.dt;
    probe.horizon = x.t_eval;
    const std::size_t steps = probe.steps();

    const AveragedModel avg(cfg.model, s.basis, s.measure, s.op, s.noise);
    const double v0 = avg.initial_value(cfg.disc.u0);
    std::vector<SpdeSolver> solvers;
    for (double e : x.eps_ladder) {
        auto c = spde_config(cfg, s, e, true);
        c.horizon = x.t_eval;
        solvers.emplace_back(s.basis, cfg.model, c);
    }

    // samples[i][b] is the M x m matrix of z_k(t_eval), k = 1..m, at eps_i in batch b.
    std::vector<std::vector<Eigen::MatrixXd>> samples(
        E, std::vector<Eigen::MatrixXd>(B, Eigen::MatrixXd(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(m))));
    parallel_for(M * B, opts.threads, [&](std::size_t idx) {
        const std::size_t b = idx / M;
        const auto r = static_cast<Eigen::Index>(idx % M);
        const auto noise = sample_path(s.noise, cfg.disc.dt, steps, idx);
        double v = 0.0;
        run_coupled(avg, v0, noise, [&](std::size_t, double, double value) { v = value; });
        for (std::size_t i = 0; i < E; ++i) {
            const double scale = 1.0 / std::sqrt(x.eps_ladder[i]);
            solvers[i].run(noise, [&](std::size_t n, double, std::span<const double> u) {
                if (n != steps) return;
                for (std::size_t k = 1; k <= m; ++k)
                    samples[i][b](r, static_cast<Eigen::Index>(k - 1)) = (u[k] - v * s.one[k]) * scale;
            });
        }
    });

    std::size_t smallest = 0;
    for (std::size_t i = 1; i < E; ++i) {
        if (x.eps_ladder[i] < x.eps_ladder[smallest]) smallest = i;
    }
    rep.eps = x.eps_ladder;
    rep.discrepancy.assign(E, 0.0);
    for (std::size_t i = 0; i < E; ++i) {
        for (std::size_t b = 0; b < B; ++b) {
            auto g = gaussian_compare(samples[i][b], rep.covariance, thr);
            rep.discrepancy[i] += g.discrepancy / static_cast<double>(B);
            if (i == smallest && b == 0) rep.primary = std::move(g);
        }
    }
    std::vector<std::size_t> order(E);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x.eps_ladder[a] > x.eps_ladder[b]; });
    rep.trend_ok = true;
    for (std::size_t i = 1; i < E; ++i) {
        if (!(rep.discrepancy[order[i]] < rep.discrepancy[order[i - 1]])) rep.trend_ok = false;
    }
    return rep;
}

EigenReport run_eigen(const ExperimentConfig& cfg, const RunOptions& opts) {
    const auto op = cfg.op.build();
    const auto basis = eigensolve(op, cfg.disc.K, cfg.disc.grid_n);
    const auto measure = invariant_density(op, cfg.disc.grid_n);
    EigenReport rep;
    rep.alphas.assign(basis.alphas().begin(), basis.alphas().end());
    for (std::size_t k = 0; k < basis.modes(); ++k) {
        rep.trace_a.push_back(basis.trace_a(k));
        rep.trace_b.push_back(basis.trace_b(k));
    }
    rep.orthonormality_error = basis.orthonormality_error();
    rep.gap = measure.gap;
    rep.analytic = basis.analytic();
    if (!opts.out_dir.empty()) {
        ensure_dir(opts.out_dir);
        CsvWriter csv(opts.out_dir / "eigen.csv");
        csv.header({"k", "alpha", "e_k(x_a)", "e_k(x_b)"});
        for (std::size_t k = 0; k < basis.modes(); ++k)
            csv.row(std::vector<double>{static_cast<double>(k), rep.alphas[k], rep.trace_a[k], rep.trace_b[k]});
        CsvWriter dcsv(opts.out_dir / "density.csv");
        dcsv.header({"x", "m"});
        for (std::size_t i = 0; i < measure.grid.nodes(); ++i)
            dcsv.row(std::vector<double>{measure.grid.x(i), measure.density[i]});
    }
    return rep;
}

ValidationReport run_validate(const ExperimentConfig& cfg, const RunOptions& /*opts*/) {
    auto rep = validate(cfg.model, Purpose::fluctuate, cfg.disc.horizon);
    std::vector<HypothesisCheck> front;
    const auto op = cfg.op.build();
    try {
        op.check_ellipticity(UniformGrid(op.x_a(), op.x_b(), cfg.disc.grid_n));
        const auto m = invariant_density(op, cfg.disc.grid_n);
        front.push_back({"H1", true, "a is bounded below on the grid; invariant density found, spectral gap " + fmt(m.gap)});
    } catch (const Error& e) {
        front.push_back({"H1", false, e.what()});
    }
    if (!cfg.noise.identity()) {
        double trace = 0.0;
        for (double l : cfg.noise.q_eigs) trace += l * l;
        front.push_back({"H3", true, "one space dimension: any bounded Q is admissible (sum lambda_j^2 = " + fmt(trace) + ")"});
    } else {
        front.push_back({"H3", true, "one space dimension: space-time white noise (Q = I) is admissible"});
    }
    rep.checks.insert(rep.checks.begin(), front.begin(), front.end());
    return rep;
}

void run_simulate(const ExperimentConfig& cfg, const RunOptions& opts) {
    const auto s = make_setup(cfg, opts);
    const auto noise = sample_path(s.noise, cfg.disc.dt, s.steps, 0);
    const AveragedModel avg(cfg.model, s.basis, s.measure, s.op, s.noise);
    const auto v = integrate_coupled(avg, avg.initial_value(cfg.disc.u0), noise);
    const std::size_t stride = std::max<std::size_t>(1, (s.steps + 499) / 500);
    auto keep = [&](std::size_t n) { return n % stride == 0 || n == s.steps; };
    if (opts.out_dir.empty()) {
        for (double e : cfg.experiment.eps_ladder) SpdeSolver(s.basis, cfg.model, spde_config(cfg, s, e, cfg.experiment.exact_variance)).integrate(noise);
        return;
    }
    const auto paths = opts.out_dir / "paths";
    ensure_dir(paths);
    ScalarPath vs;
    for (std::size_t n = 0; n < v.times.size(); ++n) {
        if (!keep(n)) continue;
        vs.times.push_back(v.times[n]);
        vs.values.push_back(v.values[n]);
    }
    write_scalar_csv(paths / "averaged.csv", vs);
    for (std::size_t i = 0; i < cfg.experiment.eps_ladder.size(); ++i) {
        const double e = cfg.experiment.eps_ladder[i];
        SpdeSolver solver(s.basis, cfg.model, spde_config(cfg, s, e, cfg.experiment.exact_variance));
        SpdePath p;
        p.K = s.basis.modes();
        solver.run(noise, [&](std::size_t n, double t, std::span<const double> u) {
            if (!keep(n)) return;
            p.times.push_back(t);
            p.modes.insert(p.modes.end(), u.begin(), u.end());
        });
        const std::string stem = "spde_eps" + std::to_string(i);
        write_modes_csv(paths / (stem + "_modes.csv"), p);
        write_grid_csv(paths / (stem + "_grid.csv"), p, s.basis);
    }
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts,
                         std::optional<ExperimentKind> kind) {
    const auto k = kind.value_or(cfg.experiment.kind);
    const auto& acc = cfg.experiment.acceptance;
    ensure_dir(opts.out_dir);
    RunResult res;
    std::vector<std::pair<std::string, std::string>> rows;
    auto add = [&](bool ok, const std::string& text) { res.checks.push_back(check_line(ok, text)); };

    switch (k) {
        case ExperimentKind::eigen: {
            const auto r = run_eigen(cfg, opts);
            bool sorted = std::is_sorted(r.alphas.begin(), r.alphas.end());
            add(r.orthonormality_error < 1e-8, "orthonormality error " + fmt(r.orthonormality_error) + " < 1e-8");
            add(sorted && r.alphas.front() == 0.0, "alpha_0 = 0 and eigenvalues ascending");
            rows = {{"modes", std::to_string(r.alphas.size())},
                    {"analytic", r.analytic ? "1" : "0"},
                    {"orthonormality_error", format_double(r.orthonormality_error)},
                    {"gap", format_double(r.gap)}};
            break;
        }
        case ExperimentKind::simulate: {
            run_simulate(cfg, opts);
            add(true, "simulation finished for " + std::to_string(cfg.experiment.eps_ladder.size()) + " eps values");
            rows = {{"eps_count", std::to_string(cfg.experiment.eps_ladder.size())}};
            break;
        }
        case ExperimentKind::converge: {
            const auto r = run_converge(cfg, opts);
            const bool slope_ok = r.fit.slope >= acc.slope_min && r.fit.slope <= acc.slope_max;
            add(slope_ok, "log-log slope " + fmt(r.fit.slope) + " in [" + fmt(acc.slope_min) + ", " + fmt(acc.slope_max) + "]");
            if (acc.require_monotone) add(r.monotone, "RMS sup-error strictly decreasing as eps decreases");
            add(r.failures.empty(), std::to_string(r.failures.size()) + " replica failures");
            rows = {{"slope", format_double(r.fit.slope)},
                    {"intercept", format_double(r.fit.intercept)},
                    {"r2", format_double(r.fit.r2)},
                    {"monotone", r.monotone ? "1" : "0"},
                    {"failures", std::to_string(r.failures.size())}};
            break;
        }
        case ExperimentKind::bound: {
            const auto r = run_bound(cfg, opts);
            add(r.finite, "all estimates finite");
            add(r.boundary_ratio < acc.max_ratio, "boundary OU max/min ratio " + fmt(r.boundary_ratio) + " < " + fmt(acc.max_ratio));
            add(r.solution_ratio < acc.max_ratio, "solution max/min ratio " + fmt(r.solution_ratio) + " < " + fmt(acc.max_ratio));
            rows = {{"boundary_ratio", format_double(r.boundary_ratio)},
                    {"solution_ratio", format_double(r.solution_ratio)}};
            break;
        }
        case ExperimentKind::fluctuate: {
            const auto r = run_fluctuate(cfg, opts);
            const auto& p = r.primary;
            add(p.covariance_ok, "covariance within " + fmt(acc.cov_rel_tol) + " (diag rel, off-diag normalized); max off-diag " + fmt(p.max_offdiag_err));
            add(p.means_ok, "means within " + fmt(acc.mean_z_max) + " standard errors");
            add(p.normality_ok, "skewness/kurtosis max z " + fmt(p.normality_z));
            if (!cfg.experiment.selftest && acc.require_trend) {
                std::string d;
                for (std::size_t i = 0; i < r.eps.size(); ++i) d += (i ? ", " : "") + fmt(r.eps[i]) + ": " + fmt(r.discrepancy[i]);
                add(r.trend_ok, "discrepancy decreasing in eps (" + d + ")");
            }
            if (!opts.out_dir.empty()) {
                CsvWriter csv(opts.out_dir / "modes.csv");
                csv.header({"mode", "c_analytic", "c_empirical", "rel_err", "mean", "mean_z", "skew", "excess_kurtosis"});
                for (const auto& mc : p.modes)
                    csv.row(std::vector<double>{static_cast<double>(mc.mode), mc.c_analytic, mc.c_empirical, mc.rel_err,
                                                mc.mean, mc.mean_z, mc.skew, mc.excess_kurtosis});
                if (!r.eps.empty()) {
                    CsvWriter t(opts.out_dir / "trend.csv");
                    t.header({"eps", "discrepancy"});
                    for (std::size_t i = 0; i < r.eps.size(); ++i) t.row(std::vector<double>{r.eps[i], r.discrepancy[i]});
                }
            }
            rows = {{"samples", std::to_string(p.samples)},
                    {"max_offdiag_err", format_double(p.max_offdiag_err)},
                    {"discrepancy", format_double(p.discrepancy)},
                    {"normality_z", format_double(p.normality_z)}};
            break;
        }
        case ExperimentKind::validate: {
            const auto r = run_validate(cfg, opts);
            for (const auto& c : r.checks) {
                add(c.holds, c.id + ": " + c.detail);
                rows.push_back({c.id, c.holds ? "holds" : "fails"});
            }
            rows.push_back({"lipschitz_f", format_double(r.lipschitz_f)});
            rows.push_back({"lipschitz_g", format_double(r.lipschitz_g)});
            rows.push_back({"sigma_bound", format_double(r.sigma_bound)});
            rows.push_back({"holder_alpha", format_double(r.holder_alpha)});
            break;
        }
    }
    res.passed = std::all_of(res.checks.begin(), res.checks.end(), [](const std::string& c) { return c.rfind("PASS", 0) == 0; });
    rows.insert(rows.begin(), {"kind", to_string(k)});
    rows.push_back({"passed", res.passed ? "1" : "0"});
    write_report(opts.out_dir, rows);
    return res;
}

}  // namespace fastavg
