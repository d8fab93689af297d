#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace skr {

// One step of the splitmix64 sequence; advances state and returns the value.
inline std::uint64_t splitmix64_next(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Collapses (seed, stream, index) into one well-mixed 64-bit value so distinct
// (stream, index) pairs give statistically independent engines; this is what
// lets trials and codebook batches be generated in any order yet agree
// bit-for-bit with a serial run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = seed;
    (void)splitmix64_next(s);
    s ^= stream * 0xD1B54A32D192ED03ULL;
    (void)splitmix64_next(s);
    s ^= index * 0x8CB92BA72F3D8DD7ULL;
    return splitmix64_next(s);
}

inline std::mt19937_64 derive_engine(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t index) {
    return std::mt19937_64(derive_seed(seed, stream, index));
}

// Uniform double in [0,1) from 53 random bits. std::uniform_real_distribution
// is implementation-defined, so results would not be portable across standard
// libraries; this is.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Unbiased uniform integer in [0,n) by rejection on a power-of-two mask
// (std::uniform_int_distribution is implementation-defined too).
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
        std::uint64_t r = g() & mask;
        if (r < n) return r;
    }
}

// Samples an index from non-negative (unnormalized) weights via a CDF walk.
// The caller guarantees at least one positive weight.
inline int sample_weights(const double* w, int k, std::mt19937_64& g) {
    double total = 0.0;
    for (int i = 0; i < k; ++i) total += w[i];
    double u = uniform01(g) * total;
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
        acc += w[i];
        if (u < acc) return i;
    }
    for (int i = k - 1; i >= 0; --i)
        if (w[i] > 0.0) return i;
    return k - 1;
}

// In-place Fisher-Yates with our own bounded sampler, for portable
// deterministic shuffles (std::shuffle is implementation-defined).
template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace skr
