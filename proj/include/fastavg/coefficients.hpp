#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fastavg {

// Closed set of coefficient families. A Field is a sum of terms, each a product
// of these factors, which keeps Lipschitz and Hölder constants computable from
// parameters.

/// c0
struct ConstantFactor {
    double c0 = 0.0;
};
/// c0 + c1*u
struct AffineFactor {
    double c0 = 0.0;
    double c1 = 0.0;
};
/// lambda*(m - u)
struct RelaxationFactor {
    double lambda = 0.0;
    double m = 0.0;
};
/// c0 + c1*sin(omega*x)
struct SpaceSinFactor {
    double c0 = 0.0;
    double c1 = 0.0;
    double omega = 0.0;
};
/// 1 + kappa*sin(omega*t)
struct TimeSinFactor {
    double kappa = 0.0;
    double omega = 0.0;
};

using Factor = std::variant<ConstantFactor, AffineFactor, RelaxationFactor, SpaceSinFactor,
                            TimeSinFactor>;

using Term = std::vector<Factor>;

/// A term restricted to a product time(t) * space(x) * (p + q*u).
/// Every term with at most one u-dependent factor admits this split.
struct AffineSplit {
    std::vector<TimeSinFactor> time_factors;
    std::vector<SpaceSinFactor> space_factors;
    double p = 0.0;
    double q = 0.0;

    double time(double t) const;
    double space(double x) const;
    bool space_constant() const { return space_factors.empty(); }
};

/// Scalar coefficient field (t, x, u) -> R.
class Field {
public:
    /// The zero field (empty sum).
    Field() = default;
    /// A single product term.
    explicit Field(Term factors);

    static Field constant(double c0);
    static Field affine(double c0, double c1);
    static Field relaxation(double lambda, double m);
    static Field space_sin(double c0, double c1, double omega);
    static Field time_sin(double kappa, double omega);

    friend Field operator*(const Field& lhs, const Field& rhs);
    friend Field operator+(const Field& lhs, const Field& rhs);

    double eval(double t, double x, double u) const;
    /// Partial derivative in the third argument.
    double eval_du(double t, double x, double u) const;

    bool depends_on_t() const;
    bool depends_on_x() const;
    bool depends_on_u() const { return u_degree() > 0; }
    /// Polynomial degree in u (largest number of u-dependent factors in a term).
    std::size_t u_degree() const;
    bool is_zero() const;

    /// Global Lipschitz constant in u over t in [0, T]; +inf when u_degree() > 1.
    double lipschitz_u(double horizon) const;
    /// Lipschitz constant in u of the u-derivative; 0 for affine fields.
    double lipschitz_du(double horizon) const;
    /// Upper bound of |field| over t in [0, T], x in [x_a, x_b] (u-independent fields only).
    double sup_abs(double horizon) const;

    /// One split per non-zero term; nullopt if some term is not affine in u.
    std::optional<std::vector<AffineSplit>> affine_splits() const;
    /// The split of a single-term field; nullopt for sums or non-affine terms.
    std::optional<AffineSplit> affine_split() const;
    const std::vector<Term>& terms() const { return terms_; }
    std::string describe() const;

    nlohmann::json to_json() const;
    /// Accepts a bare number or an object with a "family" key. Unknown keys are rejected.
    static Field from_json(const nlohmann::json& j);

private:
    std::vector<Term> terms_;
};

/// The reaction f, noise intensity g and boundary intensity sigma.
struct ModelSpec {
    Field f;
    Field g;
    Field sigma;
};

enum class Purpose { simulate, fluctuate };

struct HypothesisCheck {
    std::string id;
    bool holds = false;
    std::string detail;
};

struct ValidationReport {
    Purpose purpose = Purpose::simulate;
    std::vector<HypothesisCheck> checks;
    double lipschitz_f = 0.0;
    double lipschitz_g = 0.0;
    double lipschitz_df = 0.0;
    double sigma_bound = 0.0;
    /// Hölder exponent in time of g and sigma. Informational only.
    double holder_alpha = 1.0;

    bool ok() const;
    const HypothesisCheck* first_failure() const;
    /// Throws HypothesisViolation naming the first failed hypothesis.
    void require() const;
};

ValidationReport validate(const ModelSpec& model, Purpose purpose, double horizon);

}  // namespace fastavg
