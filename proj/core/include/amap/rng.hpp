#pragma once

#include <cstdint>
#include <string_view>

namespace amap {

/*
 * Counter-based random stream.
 *
 * Draw k (k = 0, 1, 2, ...) of a stream with key K is
 *
 *     splitmix64_finalize(K + (k + 1) * 0x9E3779B97F4A7C15)
 *
 * where splitmix64_finalize is the SplitMix64 output mixer
 *     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *     z =  z ^ (z >> 31)
 *
 * uniform() takes the top 53 bits scaled by 2^-53. normal() consumes exactly two
 * uniforms (u1, u2) and returns sqrt(-2 ln(1 - u1)) * cos(2 pi u2). Nothing is
 * cached between calls, so a stream's output depends only on (key, counter).
 */
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64();
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Independent child stream keyed by mix(key ^ fnv1a64(tag)).
    RandomStream substream(std::string_view tag) const;

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_finalize(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view text);

// Stream derivation constants for a trial seed s:
//   environment key = splitmix64_finalize(s ^ 0x656E7669726F6E6D)   ("environm")
//   noise key       = splitmix64_finalize(s ^ 0x6E6F6973652D2D2D)   ("noise---")
inline constexpr std::uint64_t kEnvironmentStreamTag = 0x656E7669726F6E6DULL;
inline constexpr std::uint64_t kNoiseStreamTag = 0x6E6F6973652D2D2DULL;

RandomStream environment_stream(std::uint64_t seed);
RandomStream noise_stream(std::uint64_t seed);

}  // namespace amap
