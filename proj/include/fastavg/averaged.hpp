#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "fastavg/coefficients.hpp"
#include "fastavg/noise.hpp"
#include "fastavg/spectral.hpp"

namespace fastavg {

struct ScalarPath {
    std::vector<double> times;
    std::vector<double> values;
};

/// Averaged coefficients of the limiting one-dimensional SDE
///   dv = Fhat(t, v) dt + <Ghat(t, v), dw^Q> + <Sigmahat(t), dw^B>,
/// and the effective diffusion Phi(t, v)^2 = |Q Ghat|^2 + |B Sigmahat|^2.
class AveragedModel {
public:
    /// Requires an H2-valid model. `basis` supplies the eigenbasis of Q.
    AveragedModel(const ModelSpec& model, const SpectralBasis& basis,
                  const InvariantMeasure& measure, const EllipticOperator1D& op,
                  const NoiseSpec& noise);

    double fhat(double t, double v) const;
    /// Ghat_j(t, v) = int g(t, x, v) e_j(x) m(x) dx, j < K.
    std::vector<double> ghat(double t, double v) const;
    double ghat(double t, double v, std::size_t j) const;
    /// sum_j Ghat_j(t, v) dW_j over the first min(K, dW.size()) modes.
    double ghat_dot(double t, double v, std::span<const double> dW) const;
    /// (Sigmahat(x_a), Sigmahat(x_b)).
    std::array<double, 2> sigmahat(double t) const;
    /// Sigmahat through delta0 <N_delta0[sigma f_i], mu> (finite-difference Neumann solve).
    std::array<double, 2> sigmahat_quadrature(double t) const;
    double phi(double t, double v) const;

    /// v(0) = <u0, mu>.
    double initial_value(std::span<const double> u0_grid) const;
    double initial_value(const Field& u0) const;

    std::size_t modes() const noexcept { return modes_; }
    const InvariantMeasure& measure() const noexcept { return measure_; }

private:
    ModelSpec model_;
    InvariantMeasure measure_;
    EllipticOperator1D op_;
    std::vector<double> lambda2_;
    std::array<double, 2> theta2_{};

    struct Term {
        AffineSplit split;
        std::vector<double> space;  // int s e_j m dx (g), or {int s m dx} (f)
        double scale(double t, double v) const { return split.time(t) * (split.p + split.q * v); }
    };
    std::vector<Term> f_terms_;
    std::vector<Term> g_terms_;
    std::size_t modes_ = 0;
    std::array<double, 2> sigma_weight_{};  // delta0 <N_delta0 f_i, mu>
};

/// Euler-Maruyama driven by the same increments as the SPDE:
///   v+ = v + Fhat dt + sum_j Ghat_j dW_j + Sigmahat_a dB_1 + Sigmahat_b dB_2.
ScalarPath integrate_coupled(const AveragedModel& model, double v0, const NoisePath& noise);

/// Calls observer(n, t_n, v) for n = 0..steps without storing the path.
template <typename Observer>
void run_coupled(const AveragedModel& model, double v0, const NoisePath& noise, Observer&& observer);

/// Euler-Maruyama for dv = Fhat dt + Phi(t, v) dbeta with standard increments `dbeta`.
ScalarPath integrate_law(const AveragedModel& model, double v0, double dt,
                         std::span<const double> dbeta);

}  // namespace fastavg

#include "fastavg/detail/averaged_impl.hpp"
