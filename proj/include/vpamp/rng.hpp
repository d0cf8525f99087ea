#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, index), so a matrix entry or a replicate stream can be
// regenerated in any order and from any thread.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace vpamp {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// SplitMix64 finalizer. Used to hash seed strata into independent keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derive a child seed from a base seed and a list of strata labels
/// (experiment id, replicate, coordinate, ...). Distinct label tuples give
/// distinct keys with overwhelming probability.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> strata) noexcept;

/// Random-access generator keyed by (seed, stream).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    /// 128 random bits for block `index`, as two 64-bit words.
    std::array<std::uint64_t, 2> bits(std::uint64_t index) const noexcept;

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform(std::uint64_t index) const noexcept;

    /// Standard normal. Draws 2j and 2j+1 share one Box-Muller block.
    double normal(std::uint64_t index) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Sequential view over a CounterRng; satisfies UniformRandomBitGenerator.
class SequentialRng {
public:
    using result_type = std::uint64_t;

    SequentialRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : rng_(seed, stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return rng_.bits(counter_++)[0]; }
    double uniform() noexcept { return rng_.uniform(counter_++); }
    double normal() noexcept { return rng_.normal(normal_counter_++); }

private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
    // normals live on a disjoint half of the index space
    std::uint64_t normal_counter_ = std::uint64_t{1} << 62;
};

} // namespace vpamp
