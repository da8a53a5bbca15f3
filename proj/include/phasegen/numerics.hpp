// Complex vector arithmetic: the unitary DFT, the real-stacking bijection used
// by the optimizer, and the Hermitian inner product.
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "types.hpp"

namespace phasegen {

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform, sign = -1 forward / +1 inverse.
// Unnormalized; callers apply the unitary 1/sqrt(n) factor.
inline void fft_pow2(ComplexVector& a, int sign) {
    const std::size_t n = a.size();
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const Complex w = std::polar(1.0, angle * static_cast<double>(j));
                const Complex u = a[start + j];
                const Complex v = a[start + j + len / 2] * w;
                a[start + j] = u + v;
                a[start + j + len / 2] = u - v;
            }
        }
    }
}

// Direct O(n^2) summation for lengths that are not powers of two.
inline ComplexVector dft_direct(const ComplexVector& v, int sign) {
    const std::size_t n = v.size();
    ComplexVector out(n);
    const double base = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        Complex acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            // reduce j*t mod n before forming the angle to limit roundoff
            const std::size_t phase = (j * t) % n;
            acc += v[t] * std::polar(1.0, base * static_cast<double>(phase));
        }
        out[j] = acc;
    }
    return out;
}

inline ComplexVector transform(const ComplexVector& v, int sign) {
    if (v.empty()) throw DimensionError("dft: empty vector");
    const std::size_t n = v.size();
    ComplexVector out;
    if (is_pow2(n)) {
        out = v;
        fft_pow2(out, sign);
    } else {
        out = dft_direct(v, sign);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Complex& c : out) c *= scale;
    return out;
}

}  // namespace detail

/// Unitary forward DFT: out[j] = (1/sqrt(n)) sum_t v[t] exp(-2*pi*i*j*t/n).
inline ComplexVector dft(const ComplexVector& v) { return detail::transform(v, -1); }

/// Unitary inverse DFT; idft(dft(v)) == v.
inline ComplexVector idft(const ComplexVector& v) { return detail::transform(v, +1); }

/// Hermitian inner product sum conj(u[t]) * v[t].
inline Complex inner(const ComplexVector& u, const ComplexVector& v) {
    if (u.size() != v.size())
        throw DimensionError("inner: length mismatch " + std::to_string(u.size()) + " vs " +
                             std::to_string(v.size()));
    Complex acc{0.0, 0.0};
    for (std::size_t t = 0; t < u.size(); ++t) acc += std::conj(u[t]) * v[t];
    return acc;
}

inline double norm2(const ComplexVector& v) {
    double acc = 0.0;
    for (const Complex& c : v) acc += std::norm(c);
    return std::sqrt(acc);
}

inline double norm2(const RealVector& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

/// Real parametrization of C^d as R^{2d}: first d entries are the real parts,
/// last d the imaginary parts. Exact bijection with real_unstack.
inline RealVector real_stack(const ComplexVector& v) {
    const std::size_t d = v.size();
    RealVector out(2 * d);
    for (std::size_t t = 0; t < d; ++t) {
        out[t] = v[t].real();
        out[d + t] = v[t].imag();
    }
    return out;
}

inline ComplexVector real_unstack(const RealVector& u) {
    if (u.size() % 2 != 0)
        throw DimensionError("real_unstack: odd length " + std::to_string(u.size()));
    const std::size_t d = u.size() / 2;
    ComplexVector out(d);
    for (std::size_t t = 0; t < d; ++t) out[t] = Complex{u[t], u[d + t]};
    return out;
}

}  // namespace phasegen
