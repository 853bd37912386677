#pragma once

// Seedable per-trial random streams. Every trial draws from its own stream
// keyed by (master seed, trial index), so results do not depend on how trials
// are distributed across workers.
//
// A stream is the SplitMix64 sequence started at the substream key. Its state
// is one word, so creating one per trial is free, unlike std::mt19937_64
// whose seeding dominated per-trial cost.

#include <cstdint>
#include <limits>

namespace bwave {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master + kGoldenGamma) ^ (index * 0xd1b54a32d192ed03ULL + 0x6a09e667f3bcc909ULL));
}

/// Satisfies UniformRandomBitGenerator.
class TrialRng {
  public:
    using result_type = std::uint64_t;

    explicit TrialRng(std::uint64_t seed) : state_(seed) {}
    static TrialRng substream(std::uint64_t master, std::uint64_t index) {
        return TrialRng(substream_seed(master, index));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    int fair_bit() { return static_cast<int>((*this)() >> 63); }

  private:
    std::uint64_t state_;
};

}  // namespace bwave
