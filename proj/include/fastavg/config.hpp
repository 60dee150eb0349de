#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fastavg/coefficients.hpp"
#include "fastavg/noise.hpp"
#include "fastavg/spectral.hpp"

namespace fastavg {

enum class ExperimentKind { eigen, simulate, converge, bound, fluctuate, validate };

ExperimentKind parse_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

struct OperatorBlock {
    double x_a = 0.0;
    double x_b = 3.141592653589793;
    Field a = Field::constant(1.0);
    Field b;

    EllipticOperator1D build() const { return EllipticOperator1D(x_a, x_b, a, b); }
};

struct DiscretizationBlock {
    std::size_t K = 64;
    std::size_t grid_n = 256;
    double dt = 1e-4;
    double horizon = 1.0;
    /// Start of the sup window; negative means automatic (0 for constant u0, T/10 otherwise).
    double delta_cut = -1.0;
    Field u0 = Field::constant(1.0);

    double sup_window_start() const;
};

struct AcceptanceBlock {
    double slope_min = 0.35;
    double slope_max = 0.65;
    bool require_monotone = true;
    double max_ratio = 10.0;
    double cov_rel_tol = 0.15;
    double mean_z_max = 3.0;
    double level = 0.01;
    bool require_trend = true;
};

struct ExperimentBlock {
    ExperimentKind kind = ExperimentKind::validate;
    std::vector<double> eps_ladder;
    std::size_t replicas = 1;
    /// Exact one-step OU variance in the SPDE noise (forced on for fluctuate).
    bool exact_variance = false;
    /// Evaluation time of the fluctuation field; defaults to T.
    double t_eval = 1.0;
    /// Number of leading non-flat modes compared in fluctuate runs.
    std::size_t compare_modes = 4;
    /// Independent batches of `replicas` used for the fluctuation trend.
    std::size_t batches = 1;
    /// Compare exact Normal(0, C) draws instead of simulating.
    bool selftest = false;
    AcceptanceBlock acceptance;
};

struct ExperimentConfig {
    OperatorBlock op;
    ModelSpec model;
    NoiseSpec noise;
    DiscretizationBlock disc;
    ExperimentBlock experiment;

    /// Parses and checks the document; unknown keys anywhere raise ConfigError.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& file);
    nlohmann::json to_json() const;
};

}  // namespace fastavg
