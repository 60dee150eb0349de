#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fastavg/averaged.hpp"
#include "fastavg/config.hpp"
#include "fastavg/error.hpp"
#include "fastavg/experiments.hpp"
#include "fastavg/fluctuation.hpp"

namespace py = pybind11;
using namespace fastavg;

namespace {

ExperimentConfig parse(const std::string& text) { return ExperimentConfig::from_json(nlohmann::json::parse(text)); }

py::dict simulate_path(const std::string& text, double eps, std::uint64_t replica) {
    const auto cfg = parse(text);
    const auto op = cfg.op.build();
    const auto basis = eigensolve(op, cfg.disc.K, cfg.disc.grid_n);
    SpdeConfig sc;
    sc.eps = eps;
    sc.horizon = cfg.disc.horizon;
    sc.dt = cfg.disc.dt;
    sc.u0 = project_initial(basis, cfg.disc.u0);
    sc.exact_variance = cfg.experiment.exact_variance;
    const SpdeSolver solver(basis, cfg.model, sc);
    const auto path = solver.integrate(sample_path(cfg.noise, sc.dt, sc.steps(), replica));
    Eigen::MatrixXd modes(path.times.size(), path.K);
    for (std::size_t n = 0; n < path.times.size(); ++n)
        for (std::size_t k = 0; k < path.K; ++k) modes(n, k) = path.at(n)[k];
    py::dict out;
    out["t"] = path.times;
    out["modes"] = modes;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral solver and averaging diagnostics for slow-fast SPDEs with boundary noise";

    // Translators are tried most recent first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<HypothesisViolation>(m, "HypothesisViolation", PyExc_ValueError);

    m.def("run", [](const std::string& kind, const std::string& config, const std::string& out_dir,
                    std::optional<std::uint64_t> seed, std::size_t threads) {
        const auto cfg = parse(config);
        RunResult res;
        {
            py::gil_scoped_release release;
            res = run_experiment(cfg, {out_dir, threads, seed}, parse_kind(kind));
        }
        return py::make_tuple(res.passed, res.checks);
    }, py::arg("kind"), py::arg("config"), py::arg("out_dir") = "", py::arg("seed") = py::none(),
       py::arg("threads") = 1, "Runs one experiment on a JSON config string; returns (passed, check lines).");

    m.def("eigenvalues", [](const std::string& config) {
        const auto cfg = parse(config);
        const auto b = eigensolve(cfg.op.build(), cfg.disc.K, cfg.disc.grid_n);
        return std::vector<double>(b.alphas().begin(), b.alphas().end());
    }, py::arg("config"));

    m.def("validate", [](const std::string& config, bool fluctuate) {
        const auto cfg = parse(config);
        const auto rep = validate(cfg.model, fluctuate ? Purpose::fluctuate : Purpose::simulate, cfg.disc.horizon);
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : rep.checks) out.emplace_back(c.id, c.holds, c.detail);
        return out;
    }, py::arg("config"), py::arg("fluctuate") = false);

    m.def("averaged", [](const std::string& config, double t, double v) {
        const auto cfg = parse(config);
        const auto op = cfg.op.build();
        const AveragedModel avg(cfg.model, eigensolve(op, cfg.disc.K, cfg.disc.grid_n),
                                invariant_density(op, cfg.disc.grid_n), op, cfg.noise);
        py::dict out;
        out["fhat"] = avg.fhat(t, v);
        out["ghat"] = avg.ghat(t, v);
        out["sigmahat"] = avg.sigmahat(t);
        out["phi"] = avg.phi(t, v);
        return out;
    }, py::arg("config"), py::arg("t") = 0.0, py::arg("v") = 0.0);

    m.def("fluctuation_covariance", [](const std::string& config, double t) {
        const auto cfg = parse(config);
        const auto b = eigensolve(cfg.op.build(), cfg.disc.K, cfg.disc.grid_n);
        return i0_covariance(cfg.model, b, cfg.noise, t).C;
    }, py::arg("config"), py::arg("t") = 1.0);

    m.def("simulate", &simulate_path, py::arg("config"), py::arg("eps"), py::arg("replica") = 0,
          "Mode trajectory of one replica: {'t': list, 'modes': (steps + 1) x K array}.");
}
