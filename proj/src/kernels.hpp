#pragma once

// Dense amplitude kernels shared by the statevector and density-matrix engines.

#include <bit>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>

namespace cvb::kernels {

using cplx = std::complex<double>;

inline void apply_1q(std::span<cplx> a, std::span<const cplx> m, std::size_t bit) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i & bit) {
            continue;
        }
        const cplx a0 = a[i], a1 = a[i | bit];
        a[i] = m[0] * a0 + m[1] * a1;
        a[i | bit] = m[2] * a0 + m[3] * a1;
    }
}

// m is 4x4 row-major in the basis 2*bit(b0) + bit(b1).
inline void apply_2q(std::span<cplx> a, std::span<const cplx> m, std::size_t b0, std::size_t b1) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i & (b0 | b1)) {
            continue;
        }
        const std::size_t idx[4] = {i, i | b1, i | b0, i | b0 | b1};
        const cplx v[4] = {a[idx[0]], a[idx[1]], a[idx[2]], a[idx[3]]};
        for (int r = 0; r < 4; ++r) {
            a[idx[r]] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
        }
    }
}

// X^xmask Z^zmask (Z applied first).
inline void apply_xz(std::span<cplx> a, std::uint64_t xmask, std::uint64_t zmask) {
    if (zmask) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::popcount(i & zmask) & 1) {
                a[i] = -a[i];
            }
        }
    }
    if (xmask) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const std::size_t j = i ^ xmask;
            if (i < j) {
                std::swap(a[i], a[j]);
            }
        }
    }
}

}  // namespace cvb::kernels
