#include <gtest/gtest.h>

#include "vpamp/rng.hpp"

#include <cmath>
#include <set>

using namespace vpamp;

// Known-answer vectors published with the reference Philox implementation.
TEST(Philox, KnownAnswerZero) {
    const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
    const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(CounterRng, RandomAccessIsPure) {
    const CounterRng a(42, 7);
    const CounterRng b(42, 7);
    for (std::uint64_t i : {0ull, 5ull, 1000000ull, 5ull}) EXPECT_EQ(a.normal(i), b.normal(i));
    EXPECT_NE(CounterRng(42, 8).normal(3), a.normal(3));
    EXPECT_NE(CounterRng(43, 7).normal(3), a.normal(3));
}

TEST(CounterRng, UniformRange) {
    const CounterRng rng(1);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = rng.uniform(i);
        EXPECT_GT(u, 0.0);
        EXPECT_LE(u, 1.0);
    }
}

TEST(CounterRng, NormalMoments) {
    const CounterRng rng(2024, 3);
    constexpr int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.normal(static_cast<std::uint64_t>(i));
        s1 += g;
        s2 += g * g;
        s4 += g * g * g * g;
    }
    EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(DeriveSeed, StrataDoNotCollide) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 100; ++r)
        for (std::uint64_t k = 0; k < 100; ++k) seen.insert(derive_seed(9, {r, k}));
    EXPECT_EQ(seen.size(), 10000u);
    EXPECT_NE(derive_seed(9, {1, 2}), derive_seed(9, {2, 1}));
    EXPECT_NE(derive_seed(9, {1}), derive_seed(9, {1, 0}));
}

TEST(SequentialRng, WorksWithStdDistributions) {
    SequentialRng a(5), b(5);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
    EXPECT_EQ(a.normal(), b.normal());
}
