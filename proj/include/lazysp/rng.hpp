#pragma once

#include <cstdint>

namespace lazysp {

// splitmix64 finalizer (Steele/Lea/Vigna constants).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Keyed PRF over an index stream. The value depends only on (key, index),
// never on query order, which is what makes Bernoulli oracles and per-trial
// seed derivation order-insensitive.
inline std::uint64_t prf_u64(std::uint64_t key, std::uint64_t index) {
    return mix64(mix64(key + kGolden) + (index + 1) * kGolden);
}

inline double unit_double(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline double prf_unit(std::uint64_t key, std::uint64_t index) {
    return unit_double(prf_u64(key, index));
}

// Sequential splitmix64 stream for generators that need many draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += kGolden;
        return mix64(state_);
    }

    double next_unit() { return unit_double(next()); }

    // Uniform value in [0, bound) via 128-bit multiply; bias < 2^-64.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    bool next_bernoulli(double p) { return next_unit() < p; }

private:
    std::uint64_t state_;
};

} // namespace lazysp
