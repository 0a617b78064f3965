#ifndef FLEETAGG_RANDOM_HPP
#define FLEETAGG_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace fleetagg {

/// SplitMix64 finalizer. Used to seed generators and derive substreams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of an independent substream: a hash of (seed, stream). Parallel
/// work items that each take substream_seed(seed, id) draw the same numbers
/// regardless of scheduling.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t state = seed;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    splitmix64(state);
    return splitmix64(state);
}

/// xoshiro256** (Blackman & Vigna), seeded through SplitMix64. Satisfies
/// UniformRandomBitGenerator; output is identical on every platform.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : s_) {
            word = splitmix64(sm);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
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

    /// Uniform on the open interval (0,1), 53-bit resolution.
    double uniform() noexcept { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

/// Standard normal variates by the Box-Muller transform; both variates of
/// each pair are used, cos branch first.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) noexcept : rng_(seed) {}

    double operator()() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniform();
        const double u2 = rng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Xoshiro256& engine() noexcept { return rng_; }

private:
    Xoshiro256 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fleetagg

#endif  // FLEETAGG_RANDOM_HPP
