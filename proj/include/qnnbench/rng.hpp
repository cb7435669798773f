#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <string_view>

namespace qnnbench {

// Deterministic random stream. Only the raw mt19937_64 output is used; all
// derived draws (uniform reals, bounded ints, normals) are computed here with
// fixed arithmetic, because std::*_distribution output is
// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t uniform_int(std::uint64_t n) {
        assert(n > 0);
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x = next_u64();
        while (x >= limit) {
            x = next_u64();
        }
        return x % n;
    }

    bool coin() { return uniform_int(2) == 1; }

    // Standard normal via Marsaglia polar; one spare value is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    template <typename It> void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const std::uint64_t j = uniform_int(i);
            std::swap(first[i - 1], first[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

// Platform-stable 64-bit hash used to derive per-cell seeds from a master
// seed plus a tag and indices. FNV-1a over the byte stream, splitmix finish.
inline std::uint64_t stable_hash(std::string_view tag,
                                 std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix_byte = [&h](std::uint8_t b) {
        h ^= b;
        h *= 0x100000001b3ULL;
    };
    for (char c : tag) {
        mix_byte(static_cast<std::uint8_t>(c));
    }
    for (std::uint64_t p : parts) {
        for (int i = 0; i < 8; ++i) {
            mix_byte(static_cast<std::uint8_t>(p >> (8 * i)));
        }
    }
    return detail::splitmix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = stable_hash(tag, parts);
    return detail::splitmix64(h ^ detail::splitmix64(master));
}

} // namespace qnnbench
