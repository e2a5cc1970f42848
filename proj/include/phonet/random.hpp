#ifndef PHONET_RANDOM_HPP
#define PHONET_RANDOM_HPP

// Platform-independent random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Standard distributions are implementation-defined, so every
// derived quantity (bounded integers, unit reals, sub-seeds, sampling without
// replacement) is computed here from raw 64-bit engine outputs.

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace phonet {

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for replicate `index` of a run with master seed `master`.
constexpr std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ (index + 1));
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1)
            return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    /// `k` distinct values from [0, n), in draw order, via partial Fisher-Yates
    /// over the identity array 0..n-1.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> bins(n);
        std::iota(bins.begin(), bins.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(bins[i], bins[j]);
        }
        bins.resize(k);
        return bins;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace phonet

#endif // PHONET_RANDOM_HPP
