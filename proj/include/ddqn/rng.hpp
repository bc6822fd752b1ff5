#pragma once

// Portable pseudo-random numbers.
//
// Every random draw in the library goes through `Rng` so that an experiment is
// bit-reproducible across compilers and standard libraries.  The generator is
// xoshiro256** (Blackman & Vigna) seeded through splitmix64.  Derived values:
//
//   uniform01()        = (next() >> 11) * 2^-53                in [0, 1)
//   uniform(lo, hi)    = lo + (hi - lo) * uniform01()          in [lo, hi)
//   uniform_index(n)   = r % n for the first draw r >= (2^64 - n) % n
//                        (rejection sampling, exactly uniform)
//
// `derive_seed(base, stream)` maps a base seed and a stream index to an
// independent seed: splitmix64_mix(base + 0x9E3779B97F4A7C15 * (stream + 1)).

#include <array>
#include <cstdint>
#include <limits>

#include "ddqn/errors.hpp"

namespace ddqn {

// splitmix64 output function (the finaliser applied to an incremented state).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return splitmix64_mix(base + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit constexpr Rng(std::uint64_t seed = 0) noexcept { reseed(seed); }

    constexpr void reseed(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            word = splitmix64_mix(x);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return next(); }

    constexpr std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw UsageError("uniform_index: empty range");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    const std::array<std::uint64_t, 4>& state() const noexcept { return state_; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace ddqn
