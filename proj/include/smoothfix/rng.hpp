#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace smoothfix {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random stream. Distribution transforms are written out explicitly
/// so a draw always consumes a fixed number of engine words; results are
/// reproducible for a given (seed, stream) pair independent of call site.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851f42d4c957f2dULL))),
          seed_(seed),
          stream_(stream) {}

    /// Derives an independent child stream; replica i of a run always gets
    /// substream(i) of the run's root stream, so results do not depend on
    /// worker count or scheduling.
    Rng substream(std::uint64_t i) const {
        return Rng(seed_, splitmix64(stream_ ^ splitmix64(i + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0,1) with 53-bit resolution.
    double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1]; safe as a log argument.
    double u01_pos() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    double exponential() { return -std::log(u01_pos()); }

    /// Box-Muller without caching: two engine words per variate.
    double normal() {
        const double r = std::sqrt(2.0 * exponential());
        const double a = 2.0 * std::numbers::pi * u01();
        return r * std::cos(a);
    }

    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is < 2^-40 for the population sizes used here
        return engine_() % n;
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace smoothfix
