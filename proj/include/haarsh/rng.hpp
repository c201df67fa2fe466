#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace haarsh {

/// SplitMix64 finalizer (Vigna / Steele-Lea-Flood). Used as the mixing
/// primitive for all keyed-uniform streams in this project; the keying is
/// part of the reproducibility contract and must never change.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Small keyed-hash sponge: absorb a fixed-length tuple of words, squeeze
/// one uniform double. Counter-based, stateless across calls.
struct KeyHash {
    uint64_t h;

    explicit KeyHash(uint64_t seed) : h(mix64(seed ^ 0x9E3779B97F4A7C15ULL)) {}

    void absorb(uint64_t x) { h = mix64(h ^ (x + 0x9E3779B97F4A7C15ULL)); }

    uint64_t bits() const { return h; }

    /// Uniform in [0, 1), 53 significant bits.
    double uniform() const { return static_cast<double>(h >> 11) * 0x1.0p-53; }
};

inline double keyed_uniform(uint64_t seed, uint64_t a, uint64_t b) {
    KeyHash k(seed);
    k.absorb(a);
    k.absorb(b);
    return k.uniform();
}

inline double keyed_uniform(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    KeyHash k(seed);
    k.absorb(a);
    k.absorb(b);
    k.absorb(c);
    return k.uniform();
}

inline constexpr int kMaxPrefixBits = 1024;
inline constexpr int kMaxPrefixWords = kMaxPrefixBits / 64;

/// Writes the first n binary fractional digits of x in [0,1) into `words`,
/// bit 1 (most significant) at the top of words[0], left-aligned, zero-padded.
/// Exact: uses the dyadic (mantissa, exponent) decomposition of the double,
/// so two doubles in the same dyadic cell of generation n produce identical
/// words. Returns the word count ceil(n/64).
inline int bit_prefix(double x, int n, uint64_t* words) {
    if (n < 0 || n > kMaxPrefixBits) throw std::invalid_argument("bit_prefix: generation out of range");
    if (x < 0.0 || x >= 1.0) throw std::invalid_argument("bit_prefix: x outside [0,1)");
    int nwords = (n + 63) / 64;
    for (int i = 0; i < nwords; ++i) words[i] = 0;
    if (x == 0.0 || n == 0) return nwords;
    int ex;
    double fr = std::frexp(x, &ex);  // x = fr * 2^ex, fr in [0.5, 1), ex <= 0
    auto m = static_cast<uint64_t>(std::ldexp(fr, 53));  // 53-bit integer
    int e = 53 - ex;                                     // x = m * 2^-e
    // bit position t (1-based) of x equals bit (e - t) of m when 0 <= e-t <= 52
    for (int s = 0; s <= 52; ++s) {
        if (((m >> s) & 1ULL) == 0) continue;
        int t = e - s;
        if (t < 1 || t > n) continue;
        words[(t - 1) >> 6] |= 1ULL << (63 - ((t - 1) & 63));
    }
    return nwords;
}

/// Same layout built from a 1-based per-axis cell index k in {1,...,2^n},
/// n <= 64: the word content matches bit_prefix of any point in that cell.
inline uint64_t prefix_word_from_index(uint64_t k, int n) {
    if (n < 1 || n > 64) throw std::invalid_argument("prefix_word_from_index: n out of [1,64]");
    uint64_t v = k - 1;
    return n == 64 ? v : (v << (64 - n));
}

}  // namespace haarsh
