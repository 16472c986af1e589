#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace kto {

/// Seeded random number generator with a fixed, portable mapping from the
/// mt19937_64 bit stream to uniform and normal variates. std::*_distribution
/// is implementation-defined, so golden trajectories would not survive a
/// standard-library change; this wrapper keeps them stable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal variate via Box-Muller, caching the second draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace kto
