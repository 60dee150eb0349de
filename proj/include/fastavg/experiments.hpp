#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fastavg/config.hpp"
#include "fastavg/fluctuation.hpp"
#include "fastavg/regression.hpp"

namespace fastavg {

struct RunOptions {
    /// Output directory; nothing is written when empty.
    std::filesystem::path out_dir;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
};

struct ReplicaFailure {
    double eps = 0.0;
    std::size_t replica = 0;
    std::size_t step = 0;
    std::string what;
};

struct RateReport {
    std::vector<double> eps;
    /// RMS over replicas of sup_{t in [delta, T]} |u_eps(t) - v(t)|_{H_mu}.
    std::vector<double> rms;
    std::vector<std::size_t> ok_replicas;
    LogLogFit fit;
    bool monotone = false;
    std::vector<ReplicaFailure> failures;
};

struct BoundRow {
    double eps = 0.0;
    /// Monte Carlo estimates of E sup_t |.|_H^2.
    double boundary_ou = 0.0;
    double solution = 0.0;
};

struct BoundReport {
    std::vector<BoundRow> rows;
    double boundary_ratio = 0.0;
    double solution_ratio = 0.0;
    bool finite = true;
};

struct FluctuationReport {
    I0Covariance covariance;
    /// Comparison at the smallest eps of the ladder, first batch.
    GaussianReport primary;
    /// Mean discrepancy over batches, one entry per eps in the ladder.
    std::vector<double> eps;
    std::vector<double> discrepancy;
    bool trend_ok = true;
};

struct EigenReport {
    std::vector<double> alphas;
    std::vector<double> trace_a;
    std::vector<double> trace_b;
    double orthonormality_error = 0.0;
    double gap = 0.0;
    bool analytic = false;
};

/// Outcome of one CLI run: `passed` maps to exit code 0, otherwise 2.
struct RunResult {
    bool passed = false;
    std::vector<std::string> checks;  // "PASS ..." / "FAIL ..." lines
};

RateReport run_converge(const ExperimentConfig& cfg, const RunOptions& opts = {});
BoundReport run_bound(const ExperimentConfig& cfg, const RunOptions& opts = {});
FluctuationReport run_fluctuate(const ExperimentConfig& cfg, const RunOptions& opts = {});
EigenReport run_eigen(const ExperimentConfig& cfg, const RunOptions& opts = {});
ValidationReport run_validate(const ExperimentConfig& cfg, const RunOptions& opts = {});
void run_simulate(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Dispatches on cfg.experiment.kind (or `kind` when given), writes outputs and
/// evaluates the configured acceptance thresholds.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts,
                         std::optional<ExperimentKind> kind = std::nullopt);

}  // namespace fastavg
