#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace qst {

/// Seeded random stream. Child streams are derived from (seed, path) with a
/// SplitMix64 mix, so a split never consumes draws from its parent and the
/// i-th child of a given stream is the same regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    Rng split(std::uint64_t index) const {
        return Rng(mix(seed_ ^ mix(index + 0x632be59bd9b4e019ULL)));
    }

    /// Named child stream; equal names give equal streams.
    Rng split(const std::string& name) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : name) {
            h = (h ^ c) * 0x100000001b3ULL;
        }
        return split(h);
    }

    double normal() { return normal_(engine_); }

    /// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
    std::complex<double> complex_normal() {
        constexpr double s = 0.70710678118654752440;
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    std::int64_t binomial(std::int64_t trials, double p) {
        if (trials <= 0 || p <= 0.0) {
            return 0;
        }
        if (p >= 1.0) {
            return trials;
        }
        return std::binomial_distribution<std::int64_t>(trials, p)(engine_);
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace qst
