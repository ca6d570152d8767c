#ifndef LCSMD_RNG_HPP
#define LCSMD_RNG_HPP

#include <cstdint>
#include <cmath>
#include <utility>
#include <vector>

namespace lcsmd {

// Counter-based deterministic randomness. Every draw is a pure function of a
// (seed, stream, counter...) tuple, so sampling is reproducible bit-for-bit,
// prefix-stable in the number of rows, and independent of evaluation order.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return hash_mix(hash_mix(a, b), c);
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return hash_mix(hash_mix(a, b, c), d);
}

// uniform in [0, 1)
inline double u01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Sequential generator for shuffles and permutation tests.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    double uniform() { return u01(next()); }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Box-Muller; fixed algorithm so results are portable across platforms.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

template <typename T>
void shuffle_inplace(std::vector<T>& v, SplitMix& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace lcsmd

#endif
