#pragma once

#include <cstdint>

namespace kaczmarz {

/// Counter-based 64-bit generator (SplitMix64). The stream is defined purely
/// by integer arithmetic, so a seed reproduces the same draws on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : counter_(seed) {}

    std::uint64_t next_u64();
    /// Uniform on [0, 1), 53-bit resolution.
    double uniform();
    /// Uniform on the open interval (0, 1).
    double uniform_open();
    /// Standard normal via the Box-Muller transform; the second variate of each
    /// pair is cached.
    double normal();

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t counter_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Seed for the k-th child stream of `master`. Distinct k give distinct seeds
/// for a fixed master.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t k);

} // namespace kaczmarz
