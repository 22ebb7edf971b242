#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

namespace fedtrial {

// All randomness in the project flows from one root seed through
// derive_seed(); no ambient entropy anywhere. Draws go through Rng's own
// integer-to-double transforms so streams are identical across standard
// library implementations (std distributions are not portable).

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stream tags keep independent derivation domains from colliding.
namespace seed_tag {
inline constexpr std::uint64_t kPatient = 0x70617469656e7400ull;
inline constexpr std::uint64_t kOutcome = 0x6f7574636f6d6500ull;
inline constexpr std::uint64_t kMixture = 0x6d69787475726500ull;
inline constexpr std::uint64_t kRiskWeights = 0x7269736b77740000ull;
inline constexpr std::uint64_t kSplit = 0x73706c6974000000ull;
inline constexpr std::uint64_t kRound = 0x726f756e64000000ull;
inline constexpr std::uint64_t kInit = 0x696e697400000000ull;
inline constexpr std::uint64_t kShuffle = 0x73687566666c6500ull;
} // namespace seed_tag

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t s = 0x243F6A8885A308D3ull;
    for (std::uint64_t p : parts) {
        std::uint64_t t = p;
        s ^= splitmix64(t);
        splitmix64(s);
    }
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    bool bernoulli(double p) { return unit() < p; }

    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace fedtrial
