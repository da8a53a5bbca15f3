// Test-only reference implementations. These deliberately avoid the library's
// computation paths: the DFT is a literal O(n^2) summation, measurement
// operators are built as dense matrices, gradients come from central finite
// differences, singular values from a hand-rolled Jacobi eigensolver on the
// Gram matrix, and least squares from explicit normal equations.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "phasegen/measurement.hpp"
#include "phasegen/types.hpp"

namespace oracle {

using phasegen::Complex;
using phasegen::ComplexVector;
using phasegen::RealVector;

/// Direct unitary DFT by definition: out[j] = n^{-1/2} sum_t v[t] e^{-2 pi i j t / n}.
inline ComplexVector dft_direct(const ComplexVector& v) {
    const std::size_t n = v.size();
    ComplexVector out(n, Complex{0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(j * t) /
                                 static_cast<double>(n);
            out[j] += v[t] * Complex{std::cos(angle), std::sin(angle)};
        }
        out[j] /= std::sqrt(static_cast<double>(n));
    }
    return out;
}

/// Dense row-major m x n matrix for the stacked masked-Fourier map.
inline std::vector<ComplexVector> dense_A(const phasegen::ProbeSet& ps) {
    const std::size_t n = ps.n;
    std::vector<ComplexVector> rows;
    rows.reserve(ps.count() * n);
    for (std::size_t i = 0; i < ps.count(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            ComplexVector row(n);
            for (std::size_t t = 0; t < n; ++t) {
                const double angle = -2.0 * std::numbers::pi * static_cast<double>(j * t) /
                                     static_cast<double>(n);
                row[t] = ps.probes[i][t] * Complex{std::cos(angle), std::sin(angle)} /
                         std::sqrt(static_cast<double>(n));
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline ComplexVector dense_apply(const std::vector<ComplexVector>& a, const ComplexVector& f) {
    ComplexVector out(a.size(), Complex{0.0, 0.0});
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t t = 0; t < f.size(); ++t) out[r] += a[r][t] * f[t];
    return out;
}

inline ComplexVector dense_apply_adjoint(const std::vector<ComplexVector>& a,
                                         const ComplexVector& g) {
    const std::size_t n = a.empty() ? 0 : a.front().size();
    ComplexVector out(n, Complex{0.0, 0.0});
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t t = 0; t < n; ++t) out[t] += std::conj(a[r][t]) * g[r];
    return out;
}

/// Central finite differences of a scalar function of a real vector.
inline RealVector fd_gradient(const std::function<double(const RealVector&)>& fn,
                              const RealVector& x, double step = 1e-6) {
    RealVector grad(x.size());
    RealVector probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double hi = fn(probe);
        probe[i] = x[i] - step;
        const double lo = fn(probe);
        probe[i] = x[i];
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi sweeps with complex
/// rotations. Ascending order. Good to ~1e-13 relative for the small
/// matrices used in tests.
inline RealVector jacobi_hermitian_eigenvalues(std::vector<ComplexVector> h) {
    const std::size_t n = h.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(h[p][q]);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex b = h[p][q];
                if (std::abs(b) < 1e-300) continue;
                const double app = h[p][p].real();
                const double aqq = h[q][q].real();
                const Complex phase = b / std::abs(b);
                const double theta = 0.5 * std::atan2(2.0 * std::abs(b), app - aqq);
                const double c = std::cos(theta);
                const Complex s = std::sin(theta) * phase;
                // rows p,q
                for (std::size_t t = 0; t < n; ++t) {
                    const Complex hp = h[p][t];
                    const Complex hq = h[q][t];
                    h[p][t] = c * hp + std::conj(s) * hq;
                    h[q][t] = -s * hp + c * hq;
                }
                // cols p,q
                for (std::size_t t = 0; t < n; ++t) {
                    const Complex hp = h[t][p];
                    const Complex hq = h[t][q];
                    h[t][p] = c * hp + s * hq;
                    h[t][q] = -std::conj(s) * hp + c * hq;
                }
            }
        }
    }
    RealVector eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = h[i][i].real();
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// Singular values (descending) of a dataset's centered n x N matrix, via the
/// Gram matrix X^H X and the Jacobi eigensolver above.
inline RealVector centered_singular_values(const std::vector<ComplexVector>& dataset) {
    const std::size_t count = dataset.size();
    const std::size_t n = dataset.front().size();
    ComplexVector mean(n, Complex{0.0, 0.0});
    for (const ComplexVector& f : dataset)
        for (std::size_t t = 0; t < n; ++t) mean[t] += f[t];
    for (Complex& c : mean) c /= static_cast<double>(count);
    std::vector<ComplexVector> centered(count, ComplexVector(n));
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t t = 0; t < n; ++t) centered[j][t] = dataset[j][t] - mean[t];
    std::vector<ComplexVector> gram(count, ComplexVector(count, Complex{0.0, 0.0}));
    for (std::size_t a = 0; a < count; ++a)
        for (std::size_t b = 0; b < count; ++b) {
            Complex acc{0.0, 0.0};
            for (std::size_t t = 0; t < n; ++t) acc += std::conj(centered[a][t]) * centered[b][t];
            gram[a][b] = acc;
        }
    RealVector eig = jacobi_hermitian_eigenvalues(std::move(gram));
    RealVector sv(eig.size());
    for (std::size_t i = 0; i < eig.size(); ++i)
        sv[i] = std::sqrt(std::max(eig[eig.size() - 1 - i], 0.0));
    return sv;  // descending
}

/// Least-squares solve of min_z || M z - r || via explicit normal equations
/// and Gaussian elimination with partial pivoting (k is small in tests).
inline ComplexVector normal_equations_solve(const std::vector<ComplexVector>& m_cols,
                                            const ComplexVector& r) {
    const std::size_t k = m_cols.size();
    std::vector<ComplexVector> a(k, ComplexVector(k + 1));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            Complex acc{0.0, 0.0};
            for (std::size_t t = 0; t < r.size(); ++t) acc += std::conj(m_cols[i][t]) * m_cols[j][t];
            a[i][j] = acc;
        }
        Complex rhs{0.0, 0.0};
        for (std::size_t t = 0; t < r.size(); ++t) rhs += std::conj(m_cols[i][t]) * r[t];
        a[i][k] = rhs;
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < k; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        std::swap(a[col], a[pivot]);
        for (std::size_t row = 0; row < k; ++row) {
            if (row == col) continue;
            const Complex factor = a[row][col] / a[col][col];
            for (std::size_t j = col; j <= k; ++j) a[row][j] -= factor * a[col][j];
        }
    }
    ComplexVector z(k);
    for (std::size_t i = 0; i < k; ++i) z[i] = a[i][k] / a[i][i];
    return z;
}

}  // namespace oracle
