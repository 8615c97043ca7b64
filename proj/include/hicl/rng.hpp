#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace hicl {

/// SplitMix64. Used to expand a single seed into stream state and to derive
/// independent per-unit seeds (e.g. one per tree in an ensemble).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// xoshiro256**, seeded by four SplitMix64 outputs. This is the only RNG the
/// library uses for data-dependent choices, so results are identical across
/// platforms and standard library implementations.
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next() {
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

    /// Uniform draw in [0, n). Plain modulo: the tiny bias is irrelevant here
    /// and the simple rule is easy to reproduce in any language.
    std::uint64_t bounded(std::uint64_t n) { return next() % n; }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

/// Fisher-Yates, iterating i = n-1 down to 1 and swapping with bounded(i+1).
template <typename T>
void shuffle(std::vector<T>& v, Xoshiro256ss& rng) {
    for (std::size_t i = v.size(); i-- > 1;) {
        std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
        std::swap(v[i], v[j]);
    }
}

inline std::vector<int> random_permutation(std::size_t n, Xoshiro256ss& rng) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    shuffle(p, rng);
    return p;
}

/// Independent seeds, one per unit, drawn from a SplitMix64 stream keyed by
/// `seed`. Precomputing them keeps ensembles reproducible regardless of how
/// the per-unit work is later ordered or parallelised.
inline std::vector<std::uint64_t> substream_seeds(std::uint64_t seed, std::size_t count) {
    SplitMix64 sm(seed);
    std::vector<std::uint64_t> out(count);
    for (auto& w : out) w = sm.next();
    return out;
}

}  // namespace hicl
