#pragma once

#include <cstdint>

namespace sabr {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++ with substream seeding: (seed, stream) is mixed through
/// splitmix64 so distinct streams are statistically independent.
struct Xoshiro256pp {
    std::uint64_t s[4];

    Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm =
            seed ^ (stream * 0xD2B74407B1CE6E93ull + 0x9E3779B97F4A7C15ull);
        for (auto& word : s) word = splitmix64(sm);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    /// uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace sabr
