#include "fastavg/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "fastavg/error.hpp"

namespace fastavg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double factor_value(const Factor& f, double t, double x, double u) {
    return std::visit(overloaded{
                          [](const ConstantFactor& c) { return c.c0; },
                          [u](const AffineFactor& a) { return a.c0 + a.c1 * u; },
                          [u](const RelaxationFactor& r) { return r.lambda * (r.m - u); },
                          [x](const SpaceSinFactor& s) { return s.c0 + s.c1 * std::sin(s.omega * x); },
                          [t](const TimeSinFactor& s) { return 1.0 + s.kappa * std::sin(s.omega * t); },
                      },
                      f);
}

double factor_du(const Factor& f) {
    return std::visit(overloaded{
                          [](const AffineFactor& a) { return a.c1; },
                          [](const RelaxationFactor& r) { return -r.lambda; },
                          [](const auto&) { return 0.0; },
                      },
                      f);
}

bool factor_depends_on_u(const Factor& f) { return factor_du(f) != 0.0; }

/// sup |factor| over t in [0, T] and all x; +inf for u-dependent factors.
double factor_sup(const Factor& f) {
    return std::visit(overloaded{
                          [](const ConstantFactor& c) { return std::abs(c.c0); },
                          [](const AffineFactor& a) { return a.c1 == 0.0 ? std::abs(a.c0) : kInf; },
                          [](const RelaxationFactor& r) { return r.lambda == 0.0 ? 0.0 : kInf; },
                          [](const SpaceSinFactor& s) {
                              return s.omega == 0.0 ? std::abs(s.c0)
                                                    : std::abs(s.c0) + std::abs(s.c1);
                          },
                          [](const TimeSinFactor& s) {
                              return s.omega == 0.0 ? 1.0 : 1.0 + std::abs(s.kappa);
                          },
                      },
                      f);
}

bool factor_zero(const Factor& f) {
    return std::visit(overloaded{
                          [](const ConstantFactor& c) { return c.c0 == 0.0; },
                          [](const AffineFactor& a) { return a.c0 == 0.0 && a.c1 == 0.0; },
                          [](const RelaxationFactor& r) { return r.lambda == 0.0; },
                          [](const SpaceSinFactor& s) {
                              return s.c0 == 0.0 && (s.c1 == 0.0 || s.omega == 0.0);
                          },
                          [](const TimeSinFactor&) { return false; },
                      },
                      f);
}

/// Product of sup |factor| over the factors not listed in `skip`.
double sup_excluding(const std::vector<Factor>& factors, std::set<std::size_t> skip) {
    double s = 1.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (skip.contains(i)) continue;
        s *= factor_sup(factors[i]);
    }
    return s;
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in field specification");
    }
}

double number(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string("field parameter '") + key + "' must be a number");
    return j.at(key).get<double>();
}

double required(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("field parameter '") + key + "' is required");
    return number(j, key, 0.0);
}

}  // namespace

double AffineSplit::time(double t) const {
    double s = 1.0;
    for (const auto& f : time_factors) s *= 1.0 + f.kappa * std::sin(f.omega * t);
    return s;
}

double AffineSplit::space(double x) const {
    double s = 1.0;
    for (const auto& f : space_factors) s *= f.c0 + f.c1 * std::sin(f.omega * x);
    return s;
}

namespace {

double term_value(const Term& term, double t, double x, double u) {
    double v = 1.0;
    for (const auto& f : term) v *= factor_value(f, t, x, u);
    return v;
}

double term_du(const Term& term, double t, double x, double u) {
    double total = 0.0;
    for (std::size_t i = 0; i < term.size(); ++i) {
        const double d = factor_du(term[i]);
        if (d == 0.0) continue;
        double rest = d;
        for (std::size_t j = 0; j < term.size(); ++j) {
            if (j != i) rest *= factor_value(term[j], t, x, u);
        }
        total += rest;
    }
    return total;
}

bool term_zero(const Term& term) {
    for (const auto& f : term) {
        if (factor_zero(f)) return true;
    }
    return false;
}

std::size_t term_degree(const Term& term) {
    if (term_zero(term)) return 0;
    std::size_t d = 0;
    for (const auto& f : term) d += factor_depends_on_u(f) ? 1 : 0;
    return d;
}

double term_lipschitz(const Term& term) {
    const std::size_t degree = term_degree(term);
    if (degree == 0) return 0.0;
    if (degree > 1) return kInf;
    for (std::size_t i = 0; i < term.size(); ++i) {
        if (factor_depends_on_u(term[i])) return std::abs(factor_du(term[i])) * sup_excluding(term, {i});
    }
    return 0.0;
}

double term_lipschitz_du(const Term& term) {
    const std::size_t degree = term_degree(term);
    if (degree <= 1) return 0.0;
    if (degree > 2) return kInf;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < term.size(); ++i) {
        if (factor_depends_on_u(term[i])) idx.push_back(i);
    }
    return 2.0 * std::abs(factor_du(term[idx[0]]) * factor_du(term[idx[1]])) * sup_excluding(term, {idx[0], idx[1]});
}

std::optional<AffineSplit> term_split(const Term& term) {
    if (term_degree(term) > 1) return std::nullopt;
    AffineSplit split;
    double scale = 1.0;
    double p = 1.0;
    double q = 0.0;
    for (const auto& f : term) {
        std::visit(overloaded{
                       [&](const ConstantFactor& c) { scale *= c.c0; },
                       [&](const AffineFactor& a) {
                           if (a.c1 == 0.0) {
                               scale *= a.c0;
                           } else {
                               p = a.c0;
                               q = a.c1;
                           }
                       },
                       [&](const RelaxationFactor& r) {
                           p = r.lambda * r.m;
                           q = -r.lambda;
                       },
                       [&](const SpaceSinFactor& s) {
                           if (s.c1 == 0.0 || s.omega == 0.0) {
                               scale *= s.c0;
                           } else {
                               split.space_factors.push_back(s);
                           }
                       },
                       [&](const TimeSinFactor& s) {
                           if (s.kappa != 0.0 && s.omega != 0.0) split.time_factors.push_back(s);
                       },
                   },
                   f);
    }
    split.p = scale * p;
    split.q = scale * q;
    return split;
}

nlohmann::json factor_json(const Factor& f) {
    return std::visit(
        overloaded{
            [](const ConstantFactor& c) { return nlohmann::json{{"family", "constant"}, {"c0", c.c0}}; },
            [](const AffineFactor& a) { return nlohmann::json{{"family", "affine"}, {"c0", a.c0}, {"c1", a.c1}}; },
            [](const RelaxationFactor& r) {
                return nlohmann::json{{"family", "relaxation"}, {"lambda", r.lambda}, {"m", r.m}};
            },
            [](const SpaceSinFactor& s) {
                return nlohmann::json{{"family", "space_sin"}, {"c0", s.c0}, {"c1", s.c1}, {"omega", s.omega}};
            },
            [](const TimeSinFactor& s) {
                return nlohmann::json{{"family", "time_sin"}, {"kappa", s.kappa}, {"omega", s.omega}};
            },
        },
        f);
}

nlohmann::json term_json(const Term& term) {
    if (term.size() == 1) return factor_json(term.front());
    nlohmann::json list = nlohmann::json::array();
    for (const auto& f : term) list.push_back(factor_json(f));
    return {{"family", "product"}, {"factors", list}};
}

}  // namespace

Field::Field(Term factors) {
    for (const auto& f : factors) {
        if (const auto* t = std::get_if<TimeSinFactor>(&f); t && !std::isfinite(t->kappa * t->omega))
            throw ConfigError("time_sin parameters must be finite");
    }
    if (factors.empty()) throw ConfigError("a product term needs at least one factor");
    terms_.push_back(std::move(factors));
}

Field Field::constant(double c0) { return Field({ConstantFactor{c0}}); }
Field Field::affine(double c0, double c1) { return Field({AffineFactor{c0, c1}}); }
Field Field::relaxation(double lambda, double m) { return Field({RelaxationFactor{lambda, m}}); }
Field Field::space_sin(double c0, double c1, double omega) {
    return Field({SpaceSinFactor{c0, c1, omega}});
}
Field Field::time_sin(double kappa, double omega) { return Field({TimeSinFactor{kappa, omega}}); }

Field operator*(const Field& lhs, const Field& rhs) {
    Field out;
    for (const auto& l : lhs.terms_) {
        for (const auto& r : rhs.terms_) {
            Term t = l;
            t.insert(t.end(), r.begin(), r.end());
            out.terms_.push_back(std::move(t));
        }
    }
    return out;
}

Field operator+(const Field& lhs, const Field& rhs) {
    Field out = lhs;
    out.terms_.insert(out.terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
    return out;
}

double Field::eval(double t, double x, double u) const {
    double v = 0.0;
    for (const auto& term : terms_) v += term_value(term, t, x, u);
    return v;
}

double Field::eval_du(double t, double x, double u) const {
    double v = 0.0;
    for (const auto& term : terms_) v += term_du(term, t, x, u);
    return v;
}

bool Field::depends_on_t() const {
    for (const auto& term : terms_) {
        if (term_zero(term)) continue;
        for (const auto& f : term) {
            if (const auto* s = std::get_if<TimeSinFactor>(&f); s && s->kappa != 0.0 && s->omega != 0.0) return true;
        }
    }
    return false;
}

bool Field::depends_on_x() const {
    for (const auto& term : terms_) {
        if (term_zero(term)) continue;
        for (const auto& f : term) {
            if (const auto* s = std::get_if<SpaceSinFactor>(&f); s && s->c1 != 0.0 && s->omega != 0.0) return true;
        }
    }
    return false;
}

std::size_t Field::u_degree() const {
    std::size_t d = 0;
    for (const auto& term : terms_) d = std::max(d, term_degree(term));
    return d;
}

bool Field::is_zero() const {
    for (const auto& term : terms_) {
        if (!term_zero(term)) return false;
    }
    return true;
}

double Field::lipschitz_u(double /*horizon*/) const {
    double L = 0.0;
    for (const auto& term : terms_) L += term_lipschitz(term);
    return L;
}

double Field::lipschitz_du(double /*horizon*/) const {
    double L = 0.0;
    for (const auto& term : terms_) L += term_lipschitz_du(term);
    return L;
}

double Field::sup_abs(double /*horizon*/) const {
    if (depends_on_u()) return kInf;
    double s = 0.0;
    for (const auto& term : terms_) {
        if (!term_zero(term)) s += sup_excluding(term, {});
    }
    return s;
}

std::optional<std::vector<AffineSplit>> Field::affine_splits() const {
    std::vector<AffineSplit> out;
    for (const auto& term : terms_) {
        if (term_zero(term)) continue;
        auto split = term_split(term);
        if (!split) return std::nullopt;
        out.push_back(std::move(*split));
    }
    return out;
}

std::optional<AffineSplit> Field::affine_split() const {
    auto all = affine_splits();
    if (!all || all->size() > 1) return std::nullopt;
    if (all->empty()) return AffineSplit{};
    return all->front();
}

std::string Field::describe() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        if (k > 0) os << " + ";
        const auto& term = terms_[k];
        for (std::size_t i = 0; i < term.size(); ++i) {
            if (i > 0) os << " * ";
            std::visit(overloaded{
                           [&](const ConstantFactor& c) { os << "constant(" << c.c0 << ")"; },
                           [&](const AffineFactor& a) { os << "affine(" << a.c0 << " + " << a.c1 << " u)"; },
                           [&](const RelaxationFactor& r) { os << "relaxation(" << r.lambda << " (" << r.m << " - u))"; },
                           [&](const SpaceSinFactor& s) {
                               os << "space_sin(" << s.c0 << " + " << s.c1 << " sin(" << s.omega << " x))";
                           },
                           [&](const TimeSinFactor& s) {
                               os << "time_sin(1 + " << s.kappa << " sin(" << s.omega << " t))";
                           },
                       },
                       term[i]);
        }
    }
    return os.str();
}

nlohmann::json Field::to_json() const {
    if (terms_.empty()) return 0.0;
    if (terms_.size() == 1) return term_json(terms_.front());
    nlohmann::json list = nlohmann::json::array();
    for (const auto& term : terms_) list.push_back(term_json(term));
    return {{"family", "sum"}, {"terms", list}};
}

Field Field::from_json(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>() == 0.0 ? Field() : constant(j.get<double>());
    if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
        throw ConfigError("field must be a number or an object with a 'family' string");
    const auto family = j.at("family").get<std::string>();
    if (family == "constant") {
        check_keys(j, {"family", "c0"});
        return constant(required(j, "c0"));
    }
    if (family == "affine") {
        check_keys(j, {"family", "c0", "c1"});
        return affine(number(j, "c0", 0.0), number(j, "c1", 0.0));
    }
    if (family == "relaxation") {
        check_keys(j, {"family", "lambda", "m"});
        return relaxation(required(j, "lambda"), number(j, "m", 0.0));
    }
    if (family == "space_sin") {
        check_keys(j, {"family", "c0", "c1", "omega"});
        return space_sin(number(j, "c0", 0.0), required(j, "c1"), required(j, "omega"));
    }
    if (family == "time_sin") {
        check_keys(j, {"family", "kappa", "omega"});
        return time_sin(required(j, "kappa"), required(j, "omega"));
    }
    if (family == "product" || family == "sum") {
        const char* key = family == "product" ? "factors" : "terms";
        check_keys(j, {"family", key});
        if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty())
            throw ConfigError(family + " needs a non-empty '" + key + "' array");
        const auto& items = j.at(key);
        Field out = from_json(items.front());
        for (std::size_t i = 1; i < items.size(); ++i)
            out = family == "product" ? out * from_json(items[i]) : out + from_json(items[i]);
        return out;
    }
    throw ConfigError("unknown field family '" + family + "'");
}

bool ValidationReport::ok() const { return first_failure() == nullptr; }

const HypothesisCheck* ValidationReport::first_failure() const {
    for (const auto& c : checks) {
        if (!c.holds) return &c;
    }
    return nullptr;
}

void ValidationReport::require() const {
    if (const auto* failed = first_failure()) throw HypothesisViolation(failed->id, failed->detail);
}

ValidationReport validate(const ModelSpec& model, Purpose purpose, double horizon) {
    ValidationReport r;
    r.purpose = purpose;
    r.lipschitz_f = model.f.lipschitz_u(horizon);
    r.lipschitz_g = model.g.lipschitz_u(horizon);
    r.lipschitz_df = model.f.lipschitz_du(horizon);
    r.sigma_bound = model.sigma.sup_abs(horizon);

    auto lipschitz_detail = [](const char* name, const Field& field, double L) {
        std::ostringstream os;
        os << name << " = " << field.describe();
        if (std::isfinite(L)) {
            os << " is Lipschitz in u with constant " << L;
        } else {
            os << " is not globally Lipschitz in u (degree " << field.u_degree() << ")";
        }
        return os.str();
    };
    r.checks.push_back({"H2(1)", std::isfinite(r.lipschitz_f), lipschitz_detail("f", model.f, r.lipschitz_f)});
    r.checks.push_back({"H2(1)", std::isfinite(r.lipschitz_g), lipschitz_detail("g", model.g, r.lipschitz_g)});
    r.checks.push_back({"H2(2)", !model.sigma.depends_on_u(),
                        model.sigma.depends_on_u()
                            ? "sigma = " + model.sigma.describe() + " depends on u"
                            : "sigma is bounded by " + std::to_string(r.sigma_bound)});

    if (purpose == Purpose::fluctuate) {
        r.checks.push_back({"H4(1)", std::isfinite(r.lipschitz_df),
                            "f has u-derivative with Lipschitz constant " + std::to_string(r.lipschitz_df)});
        r.checks.push_back({"H4(2)", !model.g.depends_on_u(),
                            model.g.depends_on_u()
                                ? "g = " + model.g.describe() + " depends on the third variable"
                                : "g does not depend on u"});
        r.checks.push_back({"H4(3)", true, "g and sigma are smooth in t (Hoelder exponent 1)"});
    }
    return r;
}

}  // namespace fastavg
