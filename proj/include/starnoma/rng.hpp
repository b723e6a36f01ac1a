#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al. 2011).
//
// A stream is addressed by (seed, trial, component): the seed is the key, and
// the counter holds the trial index, the component id and a block index. Any
// trial can therefore be regenerated in isolation, which is what makes Monte
// Carlo results independent of how trials are split across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace starnoma::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Block philox4x32_10(Block ctr, Key key) {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

// Channel components, each with its own stream per trial.
enum class Component : std::uint32_t {
    Direct = 0,
    Interference = 1,
    CascadeN = 2,
    CascadeM = 3,
};

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t trial, std::uint32_t component)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trial_lo_(static_cast<std::uint32_t>(trial)),
          trial_hi_(static_cast<std::uint32_t>(trial >> 32)),
          component_(component) {}

    Stream(std::uint64_t seed, std::uint64_t trial, Component c)
        : Stream(seed, trial, static_cast<std::uint32_t>(c)) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = philox4x32_10({trial_lo_, trial_hi_, component_, block_++}, key_);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = next_u32() >> 5;  // 27 bits
        const std::uint64_t lo = next_u32() >> 6;  // 26 bits
        return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the pair's second value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double t = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log(uniform()); }

private:
    Key key_;
    std::uint32_t trial_lo_;
    std::uint32_t trial_hi_;
    std::uint32_t component_;
    std::uint32_t block_ = 0;
    Block buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace starnoma::rng
