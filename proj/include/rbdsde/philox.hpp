#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace rbdsde {

/// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
/// Stateless: each 128-bit counter block maps to four 32-bit words under a
/// 64-bit key, so draws keyed by (seed, path, step, axis) are reproducible
/// independently of evaluation order.
namespace philox {

inline constexpr std::uint32_t kW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;

inline void mul_hilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                     std::uint32_t& hi) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(prod);
    hi = static_cast<std::uint32_t>(prod >> 32);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mul_hilo(kM4x32A, ctr[0], lo0, hi0);
        mul_hilo(kM4x32B, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW32A;
        key[1] += kW32B;
    }
    return ctr;
}

} // namespace philox

/// Uniform draw in [0, 1) for the counter (seed, path, step, axis).
inline double uniform_draw(std::uint64_t seed, std::uint64_t path,
                           std::uint32_t step, std::uint32_t axis) {
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32)};
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(path),
        static_cast<std::uint32_t>(path >> 32), step, axis};
    const auto out = philox::block(ctr, key);
    const std::uint64_t a =
        (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    return static_cast<double>(a >> 11) * 0x1.0p-53;
}

/// Standard normal draw for the counter (seed, path, step, axis).
/// Axis indexing is up to the caller (forward and backward increments use
/// disjoint axis ranges). Box-Muller on the two 64-bit halves of the block.
inline double normal_draw(std::uint64_t seed, std::uint64_t path,
                          std::uint32_t step, std::uint32_t axis) {
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32)};
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(path),
        static_cast<std::uint32_t>(path >> 32), step, axis};
    const auto out = philox::block(ctr, key);
    const std::uint64_t a =
        (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    const std::uint64_t b =
        (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    // u1 in (0,1], u2 in [0,1).
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace rbdsde
