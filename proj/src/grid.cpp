#include "fastavg/grid.hpp"

#include "fastavg/error.hpp"

namespace fastavg {

UniformGrid::UniformGrid(double x_a, double x_b, std::size_t n) : x_a_(x_a), x_b_(x_b), n_(n) {
    if (!(x_a < x_b)) throw ConfigError("grid endpoints must satisfy x_a < x_b");
    if (n < 2) throw ConfigError("grid needs at least two intervals");
}

double UniformGrid::x(std::size_t i) const noexcept {
    if (i == n_) return x_b_;
    return x_a_ + static_cast<double>(i) * h();
}

double UniformGrid::weight(std::size_t i) const noexcept {
    return (i == 0 || i == n_) ? 0.5 * h() : h();
}

double UniformGrid::integrate(std::span<const double> values) const {
    if (values.size() != nodes()) throw ConfigError("grid function has the wrong length");
    double interior = 0.0;
    for (std::size_t i = 1; i < n_; ++i) interior += values[i];
    return h() * (interior + 0.5 * (values.front() + values.back()));
}

double UniformGrid::inner(std::span<const double> lhs, std::span<const double> rhs) const {
    if (lhs.size() != nodes() || rhs.size() != nodes())
        throw ConfigError("grid function has the wrong length");
    double interior = 0.0;
    for (std::size_t i = 1; i < n_; ++i) interior += lhs[i] * rhs[i];
    return h() * (interior + 0.5 * (lhs.front() * rhs.front() + lhs.back() * rhs.back()));
}

std::vector<double> UniformGrid::points() const {
    std::vector<double> xs(nodes());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x(i);
    return xs;
}

}  // namespace fastavg
