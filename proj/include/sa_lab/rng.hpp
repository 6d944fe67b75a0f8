#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sa_lab {

// Per-replication stream: mt19937_64 seeded through seed_seq from the four
// 32-bit words of (master seed, stream index). Gaussians by Box–Muller, the
// second variate of each pair cached.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x5a1ab5eeu};
        engine_.seed(seq);
    }

    // Uniform on (0, 1].
    double uniform() { return 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double r = std::sqrt(-2.0 * std::log(uniform()));
        double a = 2.0 * std::numbers::pi * uniform();
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // Poisson(mean); exact below 1e7, rounded normal approximation above.
    double poisson(double mean) {
        if (mean <= 0.0) return 0.0;
        if (mean < 1e7) {
            std::poisson_distribution<long long> d(mean);
            return static_cast<double>(d(engine_));
        }
        double x = std::round(mean + std::sqrt(mean) * normal());
        return x < 0.0 ? 0.0 : x;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace sa_lab
