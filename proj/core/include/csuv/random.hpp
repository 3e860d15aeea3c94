#pragma once

// Reproducible random streams.
//
// All randomness flows through SplitMix64 used in counter mode: the i-th
// output of a stream keyed by k is mix64(k + (i + 1) * 0x9E3779B97F4A7C15),
// where mix64 is the SplitMix64 finalizer. A stream key is derived from a
// user seed and a (tag, index) pair, so every repetition, realization or
// fold owns an independent substream that does not depend on scheduling.
// Distributions come from Boost.Random, whose algorithms are fixed across
// platforms (unlike the std:: distributions).

#include <cstdint>
#include <limits>
#include <numeric>
#include <string_view>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace csuv {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// FNV-1a over a tag, used to turn stream names into 64-bit keys.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Counter-based SplitMix64 generator (satisfies UniformRandomBitGenerator).
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit SplitMix64(std::uint64_t key = 0) noexcept : key_(key) {}

    /// Substream for (seed, tag, index).
    static SplitMix64 stream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept {
        std::uint64_t k = mix64(seed ^ mix64(tag_hash(tag)));
        k = mix64(k + kGamma * (index + 1));
        return SplitMix64(k);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + kGamma * ++counter_); }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline double standard_normal(SplitMix64& rng) {
    return boost::random::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform(SplitMix64& rng, double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform integer in [lo, hi].
inline std::size_t uniform_index(SplitMix64& rng, std::size_t lo, std::size_t hi) {
    return boost::random::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Fisher-Yates shuffle of 0..n-1.
inline std::vector<int> random_permutation(SplitMix64& rng, std::size_t n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = uniform_index(rng, 0, i - 1);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace csuv
