// fastavg <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]
//
// Exit codes: 0 all checks passed, 2 some check failed, 1 execution error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fastavg/config.hpp"
#include "fastavg/error.hpp"
#include "fastavg/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Averaging experiments for stochastic reaction-diffusion equations with fast diffusion"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    for (const char* name : {"eigen", "simulate", "converge", "bound", "fluctuate", "validate"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "override the noise seed");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const auto* sub = app.get_subcommands().front();
    try {
        const auto cfg = fastavg::ExperimentConfig::load(config);
        fastavg::RunOptions opts;
        opts.out_dir = out;
        opts.threads = threads;
        if (sub->count("--seed") > 0) opts.seed = seed;
        const auto result = fastavg::run_experiment(cfg, opts, fastavg::parse_kind(sub->get_name()));
        for (const auto& line : result.checks) std::cout << line << '\n';
        return result.passed ? 0 : 2;
    } catch (const fastavg::HypothesisViolation& e) {
        std::cerr << "fastavg: rejected, " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fastavg: " << e.what() << '\n';
        return 1;
    }
}
