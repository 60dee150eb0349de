// Prints the reference values frozen into the acceptance test.
// Usage: freeze_oracles [elements]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "oracles.hpp"

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 4096;
    const auto alphas = oracle::fem_eigenvalues([](double x) { return 1.0 + 0.5 * std::sin(x); }, 0.0,
                                                M_PI, n, 8);
    std::printf("// a(x) = 1 + 0.5 sin x on [0, pi], %zu linear elements\n", n);
    for (double a : alphas) std::printf("%.17g,\n", a);
    const double phi2 = oracle::simpson([](double) { return 1.0 / M_PI; }, 0.0, M_PI, 2) / M_PI +
                        2.0 / (M_PI * M_PI);
    std::printf("// Phi for g = sigma = 1 on [0, pi]\n%.17g\n", std::sqrt(phi2));
}
