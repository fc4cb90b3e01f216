#pragma once

// Seeded RNG with documented stream splitting.
//
// Base generator: xoshiro256** seeded through splitmix64. Substreams are
// derived by hashing (seed, tag words) with splitmix64, so the edge stream
// of class pair (i,j) and the attribute stream of node v are independent
// of each other and of draw order. Graphs are therefore reproducible from
// (params, seed) alone; bitwise float reproducibility is guaranteed within
// one build only.

#include <cstdint>
#include <limits>

namespace strurw {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Derives the substream seed for (base_seed, tag_a, tag_b).
inline std::uint64_t substream_seed(std::uint64_t base_seed, std::uint64_t tag_a,
                                    std::uint64_t tag_b = 0) {
    std::uint64_t sm = base_seed;
    std::uint64_t h = splitmix64(sm);
    sm = h ^ (0xd1b54a32d192ed03ULL * (tag_a + 1));
    h = splitmix64(sm);
    sm = h ^ (0x8cb92ba72f3d8dd7ULL * (tag_b + 1));
    return splitmix64(sm);
}

inline Xoshiro256 substream(std::uint64_t base_seed, std::uint64_t tag_a,
                            std::uint64_t tag_b = 0) {
    return Xoshiro256(substream_seed(base_seed, tag_a, tag_b));
}

}  // namespace strurw
