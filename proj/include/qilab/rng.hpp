#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace qilab::rng {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
// Pure function of (key, counter): parallel draws need no shared state.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += W0;
                key[1] += W1;
            }
            std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

// uint64 -> double in (0, 1]: top 53 bits, shifted away from zero.
inline double u01(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 1.0) * 0x1p-53;
}

// One Philox block keyed by seed, counter (stream, draw) -> two N(0,1) values
// via Box-Muller.
inline std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
        static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
    std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                        static_cast<std::uint32_t>(seed >> 32)};
    auto r = Philox4x32::block(ctr, key);
    std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    double u1 = u01(a), u2 = u01(b);
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 2.0 * M_PI * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

// Standard complex gaussian: E g = 0, E|g|^2 = 1, E g^2 = 0
// (independent N(0,1/2) real and imaginary parts).
inline std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) {
    auto z = normal_pair(seed, stream, draw);
    return {z[0] * M_SQRT1_2, z[1] * M_SQRT1_2};
}

} // namespace qilab::rng
