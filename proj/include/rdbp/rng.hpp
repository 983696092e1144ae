#pragma once

#include <cstdint>
#include <random>

namespace rdbp {

// Explicit generator state everywhere: no globals, no entropy defaults.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 significant bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1], for logs.
inline double uniform01_open_left(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// Uniform double in the open interval (0, 1).
inline double uniform01_open(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rdbp
