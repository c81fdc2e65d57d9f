#pragma once

#include <cstdint>
#include <random>

namespace qens {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent child seeds from a
/// master seed so that every stochastic stream is addressable by
/// (master, stream-id) and reproducible regardless of scheduling.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t stream) noexcept {
    return mix64(mix64(master) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) noexcept {
    return derive_seed(derive_seed(master, a), b);
}

/// Uniform double in [0, 1) built from the top 53 bits; unlike
/// std::uniform_real_distribution this is identical across standard libraries.
inline double uniform01(Engine &eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace qens
