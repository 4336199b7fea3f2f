#pragma once

#include <cstdint>

namespace agopfit {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive a child seed from a base seed and a list of stream indices.
constexpr std::uint64_t mix64(std::uint64_t base, std::uint64_t a) {
    return mix64(mix64(base) ^ (a * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

constexpr std::uint64_t mix64(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(base, a), b);
}

/// Counter-based generator: the k-th draw is mix64(key, k), so a stream is a
/// pure function of (key, position) and never depends on call interleaving
/// across streams.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(mix64(seed)) {}

    std::uint64_t next_u64() { return mix64(key_, counter_++); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform sign in {-1, +1}.
    double sign() { return (next_u64() >> 63) ? -1.0 : 1.0; }

    /// Standard normal via Box-Muller; caches the second variate.
    double normal();

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace agopfit
