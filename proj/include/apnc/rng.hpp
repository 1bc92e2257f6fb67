#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <utility>

namespace apnc {

/// splitmix64 finalizer; bijective with full avalanche.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic counter-based random stream (splitmix64).
///
/// Streams are derived by hashing (seed, lane...) so every Monte-Carlo trial
/// owns an independent stream and results do not depend on evaluation order
/// or thread count. Gaussian variates come from Box-Muller on the raw 64-bit
/// output, keeping draws bit-reproducible across platforms.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : state_(mix64(seed ^ 0x243f6a8885a308d3ULL)) {}

    static SplitRng stream(std::uint64_t seed, std::uint64_t lane) {
        SplitRng r(0);
        r.state_ = mix64(mix64(seed ^ 0x452821e638d01377ULL) ^ mix64(lane + 0x13198a2e03707344ULL));
        return r;
    }
    static SplitRng stream(std::uint64_t seed, std::uint64_t lane_a, std::uint64_t lane_b) {
        SplitRng r = stream(seed, lane_a);
        r.state_ = mix64(r.state_ ^ mix64(lane_b + 0xa4093822299f31d0ULL));
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    int next_bit() { return int(next_u64() >> 63); }

    /// uniform on [0, 1)
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// uniform on (0, 1]; safe under log()
    double next_unit_open() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// standard normal pair (Box-Muller)
    std::pair<double, double> next_gauss_pair() {
        const double r = std::sqrt(-2.0 * std::log(next_unit_open()));
        const double t = 2.0 * std::numbers::pi * next_unit();
        return {r * std::cos(t), r * std::sin(t)};
    }

    double next_gauss() { return next_gauss_pair().first; }

private:
    std::uint64_t state_;
};

}  // namespace apnc
