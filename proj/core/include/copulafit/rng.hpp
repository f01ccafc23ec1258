#pragma once

#include <cstdint>
#include <random>

namespace copulafit {

// Deterministic RNG: mt19937_64 core with hand-mapped distributions so that
// streams are reproducible across platforms and standard-library versions
// (std:: distributions are implementation-defined; we never use them).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1): 53-bit mantissa mapping.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller (caches the spare deviate).
    double normal();

    // Derives an independent deterministic substream.
    Rng fork(std::uint64_t stream) const;

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// splitmix64 finalizer; used for seed derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace copulafit
