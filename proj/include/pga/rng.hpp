#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace pga {

// All randomness in the project flows through this header. std:: engines and
// distributions are avoided on purpose: their output is implementation-defined,
// and the record streams produced by experiment sweeps are required to be
// reproducible bit-for-bit from (config, master seed) alone.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {
inline std::uint64_t seed_part(std::uint64_t v) { return v; }
inline std::uint64_t seed_part(std::int64_t v) { return static_cast<std::uint64_t>(v); }
inline std::uint64_t seed_part(int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v)); }
inline std::uint64_t seed_part(std::string_view s) { return fnv1a64(s); }
inline std::uint64_t seed_part(const char* s) { return fnv1a64(s); }
}  // namespace detail

// Sub-seed derivation: the master seed is chained through splitmix64 with one
// round per tag component (strings hash via FNV-1a). Every experiment cell,
// replicate and epoch derives its own stream this way, so cells can run in
// parallel while producing output identical to a sequential run.
inline std::uint64_t derive_seed(std::uint64_t h) { return splitmix64(h); }

template <class First, class... Rest>
std::uint64_t derive_seed(std::uint64_t h, First first, Rest... rest) {
    return derive_seed(splitmix64(h ^ detail::seed_part(first)), rest...);
}

// Counter-based splitmix64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n), n >= 1
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // inclusive range
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool coin() { return (next() >> 63) != 0; }

    // standard normal, Box-Muller
    double normal() {
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1p-53;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // Fisher-Yates
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace pga
