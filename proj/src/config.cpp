#include "fastavg/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>

#include "fastavg/error.hpp"

namespace fastavg {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& block, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("'" + block + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in '" + block + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

Field field_or(const json& j, const char* key, Field fallback) {
    return j.contains(key) ? Field::from_json(j.at(key)) : std::move(fallback);
}

}  // namespace

ExperimentKind parse_kind(const std::string& name) {
    if (name == "eigen") return ExperimentKind::eigen;
    if (name == "simulate") return ExperimentKind::simulate;
    if (name == "converge") return ExperimentKind::converge;
    if (name == "bound") return ExperimentKind::bound;
    if (name == "fluctuate") return ExperimentKind::fluctuate;
    if (name == "validate") return ExperimentKind::validate;
    throw ConfigError("unknown experiment kind '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::eigen: return "eigen";
        case ExperimentKind::simulate: return "simulate";
        case ExperimentKind::converge: return "converge";
        case ExperimentKind::bound: return "bound";
        case ExperimentKind::fluctuate: return "fluctuate";
        case ExperimentKind::validate: return "validate";
    }
    return "unknown";
}

double DiscretizationBlock::sup_window_start() const {
    if (delta_cut >= 0.0) return delta_cut;
    return u0.depends_on_x() ? 0.1 * horizon : 0.0;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    check_keys(j, "config", {"operator", "coefficients", "noise", "discretization", "experiment"});
    ExperimentConfig cfg;

    const json empty = json::object();
    const auto& jo = j.value("operator", empty);
    check_keys(jo, "operator", {"x_a", "x_b", "a", "b"});
    cfg.op.x_a = get_or(jo, "x_a", cfg.op.x_a);
    cfg.op.x_b = get_or(jo, "x_b", cfg.op.x_b);
    cfg.op.a = field_or(jo, "a", cfg.op.a);
    cfg.op.b = field_or(jo, "b", cfg.op.b);
    if (!(cfg.op.x_b > cfg.op.x_a)) throw ConfigError("operator needs x_a < x_b");

    const auto& jc = j.value("coefficients", empty);
    check_keys(jc, "coefficients", {"f", "g", "sigma"});
    cfg.model.f = field_or(jc, "f", Field());
    cfg.model.g = field_or(jc, "g", Field());
    cfg.model.sigma = field_or(jc, "sigma", Field());

    const auto& jd = j.value("discretization", empty);
    check_keys(jd, "discretization", {"K", "grid_n", "dt", "T", "delta_cut", "u0"});
    auto& d = cfg.disc;
    d.K = count_or(jd, "K", d.K);
    d.grid_n = count_or(jd, "grid_n", d.grid_n);
    d.dt = get_or(jd, "dt", d.dt);
    d.horizon = get_or(jd, "T", d.horizon);
    d.delta_cut = get_or(jd, "delta_cut", d.delta_cut);
    d.u0 = field_or(jd, "u0", d.u0);
    if (d.K < 2) throw ConfigError("K must be at least 2");
    if (d.grid_n < 4 * d.K) throw ConfigError("grid_n must be at least 4 K");
    if (!(d.dt > 0.0) || !(d.horizon > 0.0)) throw ConfigError("dt and T must be positive");
    if (d.u0.depends_on_u() || d.u0.depends_on_t()) throw ConfigError("u0 may depend on x only");

    const auto& jn = j.value("noise", empty);
    check_keys(jn, "noise", {"q_eigs", "theta", "seed"});
    cfg.noise.q_eigs = get_or(jn, "q_eigs", std::vector<double>{});
    cfg.noise.theta = get_or(jn, "theta", std::array<double, 2>{1.0, 1.0});
    cfg.noise.seed = get_or<std::uint64_t>(jn, "seed", 0);
    cfg.noise.modes = d.K;
    cfg.noise.check();

    const auto& je = j.value("experiment", empty);
    check_keys(je, "experiment",
               {"kind", "eps_ladder", "replicas", "exact_variance", "t_eval", "compare_modes",
                "batches", "selftest", "acceptance"});
    auto& e = cfg.experiment;
    e.kind = parse_kind(get_or<std::string>(je, "kind", "validate"));
    e.eps_ladder = get_or(je, "eps_ladder", std::vector<double>{});
    e.replicas = count_or(je, "replicas", e.replicas);
    e.exact_variance = get_or(je, "exact_variance", e.exact_variance);
    e.t_eval = get_or(je, "t_eval", d.horizon);
    e.compare_modes = count_or(je, "compare_modes", e.compare_modes);
    e.batches = count_or(je, "batches", e.batches);
    e.selftest = get_or(je, "selftest", e.selftest);
    for (double eps : e.eps_ladder) {
        if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps values must lie in (0, 1]");
    }
    if (e.replicas == 0 || e.batches == 0) throw ConfigError("replicas and batches must be positive");
    if (e.compare_modes == 0 || e.compare_modes + 1 > d.K)
        throw ConfigError("compare_modes must lie in [1, K - 1]");
    if (!(e.t_eval > 0.0 && e.t_eval <= d.horizon)) throw ConfigError("t_eval must lie in (0, T]");

    const auto& ja = je.value("acceptance", empty);
    check_keys(ja, "acceptance",
               {"slope_min", "slope_max", "require_monotone", "max_ratio", "cov_rel_tol",
                "mean_z_max", "level", "require_trend"});
    auto& a = e.acceptance;
    a.slope_min = get_or(ja, "slope_min", a.slope_min);
    a.slope_max = get_or(ja, "slope_max", a.slope_max);
    a.require_monotone = get_or(ja, "require_monotone", a.require_monotone);
    a.max_ratio = get_or(ja, "max_ratio", a.max_ratio);
    a.cov_rel_tol = get_or(ja, "cov_rel_tol", a.cov_rel_tol);
    a.mean_z_max = get_or(ja, "mean_z_max", a.mean_z_max);
    a.level = get_or(ja, "level", a.level);
    a.require_trend = get_or(ja, "require_trend", a.require_trend);

    if (e.kind == ExperimentKind::converge) {
        if (d.delta_cut >= 0.0 && !(d.delta_cut < d.horizon))
            throw ConfigError("delta_cut must lie in [0, T)");
        if (e.eps_ladder.size() < 2) throw ConfigError("converge needs at least two eps values");
    }
    if ((e.kind == ExperimentKind::bound || e.kind == ExperimentKind::simulate ||
         e.kind == ExperimentKind::fluctuate) &&
        e.eps_ladder.empty())
        throw ConfigError(to_string(e.kind) + " needs a non-empty eps_ladder");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + file.string() + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["operator"] = {{"x_a", op.x_a}, {"x_b", op.x_b}, {"a", op.a.to_json()}, {"b", op.b.to_json()}};
    j["coefficients"] = {{"f", model.f.to_json()}, {"g", model.g.to_json()},
                         {"sigma", model.sigma.to_json()}};
    j["noise"] = {{"q_eigs", noise.q_eigs}, {"theta", noise.theta}, {"seed", noise.seed}};
    j["discretization"] = {{"K", disc.K},   {"grid_n", disc.grid_n},       {"dt", disc.dt},
                           {"T", disc.horizon}, {"delta_cut", disc.delta_cut}, {"u0", disc.u0.to_json()}};
    const auto& a = experiment.acceptance;
    j["experiment"] = {{"kind", to_string(experiment.kind)},
                       {"eps_ladder", experiment.eps_ladder},
                       {"replicas", experiment.replicas},
                       {"exact_variance", experiment.exact_variance},
                       {"t_eval", experiment.t_eval},
                       {"compare_modes", experiment.compare_modes},
                       {"batches", experiment.batches},
                       {"selftest", experiment.selftest},
                       {"acceptance",
                        {{"slope_min", a.slope_min},
                         {"slope_max", a.slope_max},
                         {"require_monotone", a.require_monotone},
                         {"max_ratio", a.max_ratio},
                         {"cov_rel_tol", a.cov_rel_tol},
                         {"mean_z_max", a.mean_z_max},
                         {"level", a.level},
                         {"require_trend", a.require_trend}}}};
    return j;
}

}  // namespace fastavg
