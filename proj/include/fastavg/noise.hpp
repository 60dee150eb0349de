#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace fastavg {

/// Pseudo-random source used everywhere: std::mt19937_64 (sequence fixed by the
/// C++ standard) with Marsaglia polar normals built from 53-bit uniforms, so
/// streams are reproducible across compilers and standard libraries.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed);
    double next();
    /// Uniform on [0, 1).
    double uniform();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Interior covariance Q = diag(lambda_j) and boundary covariance B = diag(theta_1, theta_2).
struct NoiseSpec {
    /// Empty means Q = I (space-time white noise, truncated at `modes`).
    std::vector<double> q_eigs;
    std::array<double, 2> theta{1.0, 1.0};
    std::size_t modes = 0;
    std::uint64_t seed = 0;

    double lambda(std::size_t j) const;
    bool identity() const { return q_eigs.empty(); }
    /// Throws ConfigError on negative intensities or a short q_eigs list.
    void check() const;
    /// Seed of replica r: seed + r.
    std::uint64_t replica_seed(std::uint64_t replica) const { return seed + replica; }
};

/// Pre-coloured Wiener increments: dW(n, j) = lambda_j dbeta_j, dB(n, i) = theta_i dbetahat_i.
class NoisePath {
public:
    NoisePath() = default;
    NoisePath(double dt, std::size_t n_steps, std::size_t modes);

    double dt() const noexcept { return dt_; }
    std::size_t steps() const noexcept { return n_steps_; }
    std::size_t modes() const noexcept { return modes_; }

    std::span<const double> dW(std::size_t n) const;
    std::span<double> dW(std::size_t n);
    std::span<const double> dB(std::size_t n) const;
    std::span<double> dB(std::size_t n);

    const std::vector<double>& dW_data() const noexcept { return dW_; }
    const std::vector<double>& dB_data() const noexcept { return dB_; }

    /// Column intensities lambda_j and theta_i the increments were coloured with.
    std::span<const double> interior_scales() const noexcept { return scale_W_; }
    std::span<const double> boundary_scales() const noexcept { return scale_B_; }
    void set_scales(std::vector<double> interior, std::array<double, 2> boundary);

    /// Sums `factor` consecutive steps into one.
    NoisePath coarsen(std::size_t factor) const;
    /// FNV-1a over the raw bytes of both increment matrices.
    std::uint64_t checksum() const;

    bool operator==(const NoisePath&) const = default;

private:
    double dt_ = 0.0;
    std::size_t n_steps_ = 0;
    std::size_t modes_ = 0;
    std::vector<double> dW_;  // n_steps x modes
    std::vector<double> dB_;  // n_steps x 2
    std::vector<double> scale_W_;
    std::vector<double> scale_B_{1.0, 1.0};
};

/// Draws increments step-major; within a step interior modes ascending, then endpoints 1, 2.
NoisePath sample_path(const NoiseSpec& spec, double dt, std::size_t n_steps);
/// Same with the replica seed spec.seed + replica.
NoisePath sample_path(const NoiseSpec& spec, double dt, std::size_t n_steps,
                      std::uint64_t replica);

/// Brownian-bridge subdivision of every increment into `factor` substeps.
NoisePath refine(const NoisePath& path, std::size_t factor, std::uint64_t seed);

/// Standard scalar Brownian increments of variance dt.
std::vector<double> sample_scalar_increments(std::uint64_t seed, double dt, std::size_t n_steps);

/// Binary dump, all little-endian: "NZP1", dt (f64), n_steps (u64), modes (u64),
/// lambda_0..lambda_{K-1} (f64), theta_1, theta_2 (f64), dW rows, dB rows (f64).
void write_noise_binary(const NoisePath& path, const std::filesystem::path& file);
NoisePath read_noise_binary(const std::filesystem::path& file);

}  // namespace fastavg
