#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace uicast {

/// splitmix64 finalizer, used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives a child seed from a root seed and a path of stream identifiers
/// (e.g. {tag, iteration, column}). Identical paths give identical streams,
/// which is what makes serial and multi-threaded runs bit-identical.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(seed);
    for (std::uint64_t p : path) s = mix64(s ^ mix64(p));
    return s;
}

// Stream tags keeping independent RNG consumers from colliding.
inline constexpr std::uint64_t kSeedTree = 0x01;
inline constexpr std::uint64_t kSeedForest = 0x02;
inline constexpr std::uint64_t kSeedTrainDraw = 0x03;
inline constexpr std::uint64_t kSeedOperational = 0x04;
inline constexpr std::uint64_t kSeedReplicate = 0x05;
inline constexpr std::uint64_t kSeedMissingness = 0x06;
inline constexpr std::uint64_t kSeedProcess = 0x07;

/// Deterministic random stream. All variates are produced from the raw
/// mt19937_64 output (whose sequence the standard pins down), never from
/// std distribution objects, so two runs with the same seed generate
/// identical draws regardless of standard-library version.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n >= 1. Rejection sampling keeps it unbiased.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Gaussian variate via the Marsaglia polar method.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
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
        return mean + stddev * u * f;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace uicast
