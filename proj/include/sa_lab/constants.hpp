#pragma once

namespace sa_lab {

// Shared numeric tolerances.
struct Tolerances {
    static constexpr double algebraic = 1e-12;
    static constexpr double overflow = 1e12;
    static constexpr double reconstruction = 1e-10;
    static constexpr double weight_identity = 1e-8;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sa_lab
