#pragma once

#include <cstdint>
#include <initializer_list>

namespace smart {

// Deterministic xoshiro256** generator with splitmix64 seeding.
// Every parallel unit of work (bootstrap resample, simulation run, corrupted
// row) derives its own stream from (seed, ids...), so results do not depend
// on thread count or iteration order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform01();

    // Inclusive integer range, unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    bool bernoulli(double p);

    // Standard normal via Box-Muller; consumes two uniforms per pair,
    // second value cached.
    double normal();
    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    // Weighted category index for a small probability vector.
    int categorical(const double* probs, int k);

private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// Hash-combines a seed with stream identifiers (splitmix64 chain).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
    return derive_seed(seed, {a});
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(seed, {a, b});
}
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    return derive_seed(seed, {a, b, c});
}

} // namespace smart
