#pragma once

// Pinned randomness kit. Every random choice in the toolkit flows through
// these routines so that plans, partitions and datasets reproduce
// byte-for-byte on any platform:
//   - SplitMix64 (Vigna 2015, fixed-increment SplittableRandom) as the
//     generator,
//   - Lemire multiply-shift rejection for unbiased bounded draws,
//   - Fisher-Yates (descending, swap with j = bounded(i+1)) for shuffles,
//   - FNV-1a 64 for deriving per-item seeds from string keys.
// Changing any of these invalidates golden fixtures; don't.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace esia {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Unbiased draw in [0, n). n must be nonzero.
    std::uint64_t bounded(std::uint64_t n) {
        std::uint64_t x = next();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next();
                m = static_cast<unsigned __int128>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Inclusive range draw.
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
        return lo + bounded(hi - lo + 1);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Per-item seed: master seed folded with the item's relative path.
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::string_view relative_path) {
    return master_seed ^ fnv1a64(relative_path);
}

}  // namespace esia
