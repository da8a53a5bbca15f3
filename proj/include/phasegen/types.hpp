// Core value types and the error hierarchy shared by all modules.
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasegen {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using RealVector = std::vector<double>;

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand sizes do not match the operation's contract.
struct DimensionError : Error {
    using Error::Error;
};

// A scalar argument is outside its admissible range.
struct ParameterError : Error {
    using Error::Error;
};

// Malformed text in a dataset, model, or other data file.
struct ParseError : Error {
    using Error::Error;
};

// Problems with experiment/CLI configuration (maps to a usage exit code).
struct ConfigError : Error {
    using Error::Error;
};

// Structurally valid input that violates a semantic requirement
// (too few samples, broken invariants on load, ...).
struct DataError : Error {
    using Error::Error;
};

// A numerical procedure could not produce a usable result.
struct NumericalError : Error {
    using Error::Error;
};

// Filesystem-level failure.
struct FileError : Error {
    using Error::Error;
};

/// Dense complex matrix, row-major storage.
struct ComplexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    ComplexVector data;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    Complex& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Complex& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// y = M x
inline ComplexVector matvec(const ComplexMatrix& m, const ComplexVector& x) {
    if (x.size() != m.cols)
        throw DimensionError("matvec: vector length " + std::to_string(x.size()) +
                             " does not match matrix cols " + std::to_string(m.cols));
    ComplexVector y(m.rows, Complex{0.0, 0.0});
    for (std::size_t r = 0; r < m.rows; ++r) {
        Complex acc{0.0, 0.0};
        const Complex* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

/// y = M^H x  (conjugate transpose)
inline ComplexVector matvec_adjoint(const ComplexMatrix& m, const ComplexVector& x) {
    if (x.size() != m.rows)
        throw DimensionError("matvec_adjoint: vector length " + std::to_string(x.size()) +
                             " does not match matrix rows " + std::to_string(m.rows));
    ComplexVector y(m.cols, Complex{0.0, 0.0});
    for (std::size_t r = 0; r < m.rows; ++r) {
        const Complex* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) y[c] += std::conj(row[c]) * x[r];
    }
    return y;
}

}  // namespace phasegen
