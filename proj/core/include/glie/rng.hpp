#pragma once

#include <cstdint>
#include <string_view>

namespace glie {

// FNV-1a, used to key deterministic embeddings and derived RNG streams.
std::uint64_t fnv1a64(std::string_view s);

// Deterministic splittable generator built on splitmix64. Every random
// choice in the pipeline flows from one root seed through split() calls,
// so runs are reproducible bit for bit on a given platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double();

    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (two uniforms per draw, no caching).
    double gaussian();

    // Uniform integer in [lo, hi], inclusive. Rejection sampling, no bias.
    int uniform_int(int lo, int hi);

    // Derive an independent child stream without advancing this one.
    Rng split(std::uint64_t salt) const;
    Rng split(std::string_view tag) const;

private:
    std::uint64_t state_;
};

} // namespace glie
