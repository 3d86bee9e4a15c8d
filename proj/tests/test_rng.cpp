#include <cmath>
#include <cstdint>
#include <numbers>

#include <gtest/gtest.h>

#include "amap/rng.hpp"

namespace {

std::uint64_t mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

TEST(RandomStream, FollowsDocumentedCounterFormula)
{
    const std::uint64_t key = 0x1234567890ABCDEFULL;
    amap::RandomStream s(key);
    for (std::uint64_t k = 0; k < 16; ++k) {
        EXPECT_EQ(s.next_u64(), mix(key + (k + 1) * 0x9E3779B97F4A7C15ULL));
    }
    EXPECT_EQ(s.counter(), 16u);
}

TEST(RandomStream, UniformAndNormalFromDocumentedMaps)
{
    amap::RandomStream a(7), b(7);
    const double u = a.uniform();
    EXPECT_EQ(u, static_cast<double>(b.next_u64() >> 11) * 0x1.0p-53);

    amap::RandomStream c(9), d(9);
    const double z = c.normal();
    const double u1 = d.uniform();
    const double u2 = d.uniform();
    EXPECT_DOUBLE_EQ(z, std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2));
    EXPECT_EQ(c.counter(), 2u);
}

TEST(RandomStream, SeedsDeriveFromTags)
{
    EXPECT_EQ(amap::environment_stream(3).key(), mix(3 ^ 0x656E7669726F6E6DULL));
    EXPECT_EQ(amap::noise_stream(3).key(), mix(3 ^ 0x6E6F6973652D2D2DULL));
    EXPECT_NE(amap::environment_stream(3).key(), amap::noise_stream(3).key());
}

TEST(RandomStream, SubstreamsAreIndependentOfParentPosition)
{
    amap::RandomStream s(11);
    const auto before = s.substream("x").key();
    s.next_u64();
    EXPECT_EQ(s.substream("x").key(), before);
    EXPECT_NE(s.substream("y").key(), before);
}

TEST(RandomStream, NormalMomentsAndBelowRange)
{
    amap::RandomStream s(5);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(s.below(7), 7u);
    }
}
