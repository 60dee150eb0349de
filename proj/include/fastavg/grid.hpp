#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fastavg {

/// Uniform vertex grid x_i = x_a + i*h, i = 0..n, on [x_a, x_b].
class UniformGrid {
public:
    UniformGrid() = default;
    UniformGrid(double x_a, double x_b, std::size_t n);

    double x_a() const noexcept { return x_a_; }
    double x_b() const noexcept { return x_b_; }
    double length() const noexcept { return x_b_ - x_a_; }
    /// Number of intervals; there are n()+1 nodes.
    std::size_t n() const noexcept { return n_; }
    std::size_t nodes() const noexcept { return n_ + 1; }
    double h() const noexcept { return (x_b_ - x_a_) / static_cast<double>(n_); }
    double x(std::size_t i) const noexcept;

    /// Composite trapezoid weight of node i.
    double weight(std::size_t i) const noexcept;

    /// Composite trapezoid rule for samples on this grid.
    double integrate(std::span<const double> values) const;
    /// Trapezoid rule for the product of two grid functions.
    double inner(std::span<const double> lhs, std::span<const double> rhs) const;

    std::vector<double> points() const;

    bool operator==(const UniformGrid&) const = default;

private:
    double x_a_ = 0.0;
    double x_b_ = 1.0;
    std::size_t n_ = 1;
};

}  // namespace fastavg
