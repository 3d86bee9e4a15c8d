#include "amap/rng.hpp"

#include <cmath>
#include <numbers>

namespace amap {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_finalize(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t RandomStream::next_u64()
{
    ++counter_;
    return splitmix64_finalize(key_ + counter_ * kGolden);
}

double RandomStream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal()
{
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::below(std::uint64_t n)
{
    if (n <= 1) {
        return 0;
    }
    // Rejection keeps the result unbiased; expected draws < 2.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) {
        v = next_u64();
    }
    return v % n;
}

RandomStream RandomStream::substream(std::string_view tag) const
{
    return RandomStream(splitmix64_finalize(key_ ^ fnv1a64(tag)));
}

RandomStream environment_stream(std::uint64_t seed)
{
    return RandomStream(splitmix64_finalize(seed ^ kEnvironmentStreamTag));
}

RandomStream noise_stream(std::uint64_t seed)
{
    return RandomStream(splitmix64_finalize(seed ^ kNoiseStreamTag));
}

}  // namespace amap
