#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>

namespace cvarssp {

namespace detail {

// SplitMix64 step, used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/**
 * Deterministic xoshiro256++ stream.
 *
 * Streams are value types; a stream derived from the same
 * (master seed, iteration, episode) triple always produces the same
 * sequence, independent of which thread consumes it.  All sampling
 * helpers consume a fixed number of draws so replay is exact.
 */
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = detail::splitmix64(x);
    }

    /// Independent per-episode stream keyed by (master, iteration, episode).
    static RandomStream derive(std::uint64_t master, std::uint64_t iteration,
                               std::uint64_t episode) {
        std::uint64_t x = master;
        std::uint64_t a = detail::splitmix64(x);
        x ^= 0x9e3779b97f4a7c15ULL * (iteration + 1);
        std::uint64_t b = detail::splitmix64(x);
        x ^= 0xd1b54a32d192ed03ULL * (episode + 1);
        std::uint64_t c = detail::splitmix64(x);
        RandomStream r(a ^ (b + 0x9e3779b97f4a7c15ULL) ^ (c << 1));
        return r;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    /**
     * Sample an index from an unnormalized-tolerant probability vector by
     * inverse CDF in index order.  Consumes exactly one uniform.
     */
    std::size_t categorical(std::span<const double> probs) {
        assert(!probs.empty());
        const double u = uniform01();
        double cum = 0.0;
        std::size_t last_positive = 0;
        bool seen_positive = false;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > 0.0) {
                last_positive = i;
                seen_positive = true;
            }
            cum += probs[i];
            if (u < cum) return i;
        }
        assert(seen_positive);
        (void)seen_positive;
        return last_positive;  // guards against rounding in the final bin
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cvarssp
