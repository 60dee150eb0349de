#include "fastavg/noise.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fastavg/error.hpp"

namespace fastavg {

NormalStream::NormalStream(std::uint64_t seed) : engine_(seed) {}

double NormalStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double NormalStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double NoiseSpec::lambda(std::size_t j) const {
    if (identity()) return 1.0;
    return j < q_eigs.size() ? q_eigs[j] : 0.0;
}

void NoiseSpec::check() const {
    if (modes == 0) throw ConfigError("noise needs at least one interior mode");
    if (!identity() && q_eigs.size() < modes)
        throw ConfigError("q_eigs lists fewer eigenvalues than interior modes");
    for (double l : q_eigs) {
        if (!(l >= 0.0)) throw ConfigError("Q eigenvalues must be non-negative");
    }
    for (double t : theta) {
        if (!(t >= 0.0)) throw ConfigError("B eigenvalues theta must be non-negative");
    }
}

NoisePath::NoisePath(double dt, std::size_t n_steps, std::size_t modes)
    : dt_(dt), n_steps_(n_steps), modes_(modes), dW_(n_steps * modes, 0.0), dB_(n_steps * 2, 0.0),
      scale_W_(modes, 1.0) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
}

std::span<const double> NoisePath::dW(std::size_t n) const { return {dW_.data() + n * modes_, modes_}; }
std::span<double> NoisePath::dW(std::size_t n) { return {dW_.data() + n * modes_, modes_}; }
std::span<const double> NoisePath::dB(std::size_t n) const { return {dB_.data() + n * 2, 2}; }
std::span<double> NoisePath::dB(std::size_t n) { return {dB_.data() + n * 2, 2}; }

void NoisePath::set_scales(std::vector<double> interior, std::array<double, 2> boundary) {
    if (interior.size() != modes_) throw ConfigError("interior scale count does not match modes");
    scale_W_ = std::move(interior);
    scale_B_ = {boundary[0], boundary[1]};
}

NoisePath NoisePath::coarsen(std::size_t factor) const {
    if (factor == 0 || n_steps_ % factor != 0)
        throw ConfigError("coarsening factor must divide the step count");
    NoisePath out(dt_ * static_cast<double>(factor), n_steps_ / factor, modes_);
    out.scale_W_ = scale_W_;
    out.scale_B_ = scale_B_;
    for (std::size_t n = 0; n < out.n_steps_; ++n) {
        auto w = out.dW(n);
        auto b = out.dB(n);
        for (std::size_t s = 0; s < factor; ++s) {
            const auto fw = dW(n * factor + s);
            const auto fb = dB(n * factor + s);
            for (std::size_t j = 0; j < modes_; ++j) w[j] += fw[j];
            b[0] += fb[0];
            b[1] += fb[1];
        }
    }
    return out;
}

std::uint64_t NoisePath::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::vector<double>& v) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
        for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(dW_);
    mix(dB_);
    return h;
}

NoisePath sample_path(const NoiseSpec& spec, double dt, std::size_t n_steps) {
    spec.check();
    NoisePath path(dt, n_steps, spec.modes);
    std::vector<double> lambdas(spec.modes);
    for (std::size_t j = 0; j < spec.modes; ++j) lambdas[j] = spec.lambda(j);
    path.set_scales(lambdas, spec.theta);

    NormalStream rng(spec.seed);
    const double sq = std::sqrt(dt);
    for (std::size_t n = 0; n < n_steps; ++n) {
        auto w = path.dW(n);
        for (std::size_t j = 0; j < spec.modes; ++j) w[j] = lambdas[j] * sq * rng.next();
        auto b = path.dB(n);
        b[0] = spec.theta[0] * sq * rng.next();
        b[1] = spec.theta[1] * sq * rng.next();
    }
    return path;
}

NoisePath sample_path(const NoiseSpec& spec, double dt, std::size_t n_steps, std::uint64_t replica) {
    NoiseSpec s = spec;
    s.seed = spec.replica_seed(replica);
    return sample_path(s, dt, n_steps);
}

NoisePath refine(const NoisePath& path, std::size_t factor, std::uint64_t seed) {
    if (factor < 2) throw ConfigError("refinement factor must be at least 2");
    const std::size_t K = path.modes();
    NoisePath out(path.dt() / static_cast<double>(factor), path.steps() * factor, K);
    const auto sw = path.interior_scales();
    const auto sb = path.boundary_scales();
    out.set_scales({sw.begin(), sw.end()}, {sb[0], sb[1]});

    NormalStream rng(seed);
    const double sq = std::sqrt(out.dt());
    const double inv = 1.0 / static_cast<double>(factor);
    std::vector<double> sub(factor);
    // Conditioned on their sum, f iid normals minus their mean plus the coarse
    // increment / f have the Brownian-bridge law of the substeps.
    auto bridge = [&](double coarse, double scale, auto&& store) {
        double total = 0.0;
        for (std::size_t s = 0; s < factor; ++s) {
            sub[s] = scale * sq * rng.next();
            total += sub[s];
        }
        const double shift = (coarse - total) * inv;
        for (std::size_t s = 0; s < factor; ++s) store(s, sub[s] + shift);
    };
    for (std::size_t n = 0; n < path.steps(); ++n) {
        const auto w = path.dW(n);
        const auto b = path.dB(n);
        for (std::size_t j = 0; j < K; ++j) {
            bridge(w[j], sw[j], [&](std::size_t s, double v) { out.dW(n * factor + s)[j] = v; });
        }
        for (std::size_t i = 0; i < 2; ++i) {
            bridge(b[i], sb[i], [&](std::size_t s, double v) { out.dB(n * factor + s)[i] = v; });
        }
    }
    return out;
}

std::vector<double> sample_scalar_increments(std::uint64_t seed, double dt, std::size_t n_steps) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    NormalStream rng(seed);
    const double sq = std::sqrt(dt);
    std::vector<double> out(n_steps);
    for (auto& v : out) v = sq * rng.next();
    return out;
}

namespace {

template <typename T>
void put(std::ostream& os, T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        std::reverse(bits.begin(), bits.end());
        os.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
    } else {
        os.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }
}

template <typename T>
T get(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bits{};
    is.read(reinterpret_cast<char*>(bits.data()), sizeof(T));
    if (!is) throw ConfigError("truncated noise file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    return std::bit_cast<T>(bits);
}

}  // namespace

void write_noise_binary(const NoisePath& path, const std::filesystem::path& file) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + file.string() + " for writing");
    os.write("NZP1", 4);
    put<double>(os, path.dt());
    put<std::uint64_t>(os, path.steps());
    put<std::uint64_t>(os, path.modes());
    for (double s : path.interior_scales()) put<double>(os, s);
    for (double s : path.boundary_scales()) put<double>(os, s);
    for (double v : path.dW_data()) put<double>(os, v);
    for (double v : path.dB_data()) put<double>(os, v);
    if (!os) throw ConfigError("failed writing " + file.string());
}

NoisePath read_noise_binary(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + file.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NZP1", 4) != 0) throw ConfigError("not an NZP1 noise file");
    const double dt = get<double>(is);
    const auto steps = get<std::uint64_t>(is);
    const auto modes = get<std::uint64_t>(is);
    NoisePath path(dt, steps, modes);
    std::vector<double> sw(modes);
    for (auto& s : sw) s = get<double>(is);
    std::array<double, 2> sb{get<double>(is), get<double>(is)};
    path.set_scales(std::move(sw), sb);
    for (std::size_t n = 0; n < steps; ++n) {
        for (auto& v : path.dW(n)) v = get<double>(is);
    }
    for (std::size_t n = 0; n < steps; ++n) {
        for (auto& v : path.dB(n)) v = get<double>(is);
    }
    return path;
}

}  // namespace fastavg
