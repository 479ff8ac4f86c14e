#pragma once

// Counter-based random number generation (Philox-style 4x64, 10 rounds).
// Every Gaussian increment is a pure function of (seed, path_id, step, mode),
// so ensemble results do not depend on thread scheduling and any path can be
// replayed in isolation.

#include <cmath>
#include <cstdint>
#include <array>
#include <span>

namespace spme {

namespace detail {

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    __uint128_t p = static_cast<__uint128_t>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

} // namespace detail

struct Philox4x64 {
    static constexpr std::uint64_t kMul0  = 0xD2E7470EE14C6C93ull;
    static constexpr std::uint64_t kMul1  = 0xCA5A826395121157ull;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            std::uint64_t hi0, lo0, hi1, lo1;
            detail::mulhilo(kMul0, ctr[0], hi0, lo0);
            detail::mulhilo(kMul1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

// Uniform in (0,1): top 53 bits plus half an ulp so log() never sees 0.
inline double to_unit_open(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Four standard normals per counter block via Box-Muller.
inline void gaussian_block(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                           std::uint64_t quad, double out[4]) {
    const auto r = Philox4x64::block({step, quad, 0, 0}, {seed, path});
    const double u0 = to_unit_open(r[0]), u1 = to_unit_open(r[1]);
    const double u2 = to_unit_open(r[2]), u3 = to_unit_open(r[3]);
    const double rad0 = std::sqrt(-2.0 * std::log(u0));
    const double rad1 = std::sqrt(-2.0 * std::log(u2));
    constexpr double two_pi = 6.283185307179586476925286766559;
    out[0] = rad0 * std::cos(two_pi * u1);
    out[1] = rad0 * std::sin(two_pi * u1);
    out[2] = rad1 * std::cos(two_pi * u3);
    out[3] = rad1 * std::sin(two_pi * u3);
}

// Fills out[i] with the standard normal attached to (seed, path, step, mode i).
inline void fill_gaussian(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                          std::span<double> out) {
    double buf[4];
    const std::size_t n = out.size();
    for (std::size_t base = 0; base < n; base += 4) {
        gaussian_block(seed, path, step, base / 4, buf);
        const std::size_t m = (n - base < 4) ? n - base : 4;
        for (std::size_t j = 0; j < m; ++j) out[base + j] = buf[j];
    }
}

// One uniform in (0,1) keyed the same way; used by samplers that need
// reproducible auxiliary draws.
inline double uniform_at(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                         std::uint64_t tag) {
    return to_unit_open(Philox4x64::block({step, tag, 1, 0}, {seed, path})[0]);
}

// Independent sub-stream seed for a named role (lhs/rhs ensembles and the
// like), so estimators that must not share noise get disjoint streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return Philox4x64::block({tag, 0xD1B54A32D192ED03ull, 2, 0}, {seed, 0})[0];
}

} // namespace spme
