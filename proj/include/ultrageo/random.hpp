#pragma once

#include <cstdint>

namespace ultrageo {

/// SplitMix64: 64-bit state, increment 0x9E3779B97F4A7C15, output mix
/// (z ^ z>>30) * 0xBF58476D1CE4E5B9, (z ^ z>>27) * 0x94D049BB133111EB, z ^ z>>31.
/// Bounded draws use rejection sampling so results are identical on every
/// platform (std distributions are implementation-defined).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    /// Uniform in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Child generator; lets batch jobs draw independent streams by index.
    SplitMix64 fork() noexcept { return SplitMix64(next()); }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace ultrageo
