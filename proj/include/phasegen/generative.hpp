// Affine generative model f = G z + b with orthonormal columns, trained by PCA
// of a complex dataset. Because G^H G = I the latent projection is closed-form
// and the model is an exact isometry of the latent space.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace phasegen {

struct GenerativeModel {
    std::size_t n = 0;        // signal dimension
    std::size_t k = 0;        // latent dimension
    ComplexMatrix basis;      // n x k, orthonormal columns
    ComplexVector mean;       // length n
    RealVector spectrum;      // k singular values of the centered data, descending
    bool rank_deficient = false;
};

namespace detail {

inline void check_model_invariants(const GenerativeModel& m, double tol = 1e-10) {
    if (m.k >= m.n) throw DataError("generative model: k must be < n");
    if (m.basis.rows != m.n || m.basis.cols != m.k || m.mean.size() != m.n ||
        m.spectrum.size() != m.k)
        throw DataError("generative model: inconsistent dimensions");
    for (std::size_t i = 0; i + 1 < m.k; ++i)
        if (m.spectrum[i] < m.spectrum[i + 1]) throw DataError("generative model: spectrum not descending");
    for (double s : m.spectrum)
        if (!(s >= 0.0)) throw DataError("generative model: negative spectrum entry");
    // G^H G == I_k
    for (std::size_t a = 0; a < m.k; ++a) {
        for (std::size_t b = a; b < m.k; ++b) {
            Complex acc{0.0, 0.0};
            for (std::size_t r = 0; r < m.n; ++r)
                acc += std::conj(m.basis.at(r, a)) * m.basis.at(r, b);
            const double want = (a == b) ? 1.0 : 0.0;
            if (std::abs(acc - Complex{want, 0.0}) > tol)
                throw DataError("generative model: columns not orthonormal");
        }
    }
}

}  // namespace detail

/// PCA training: b is the sample mean, G collects the top-k left singular
/// vectors of the centered n x N data matrix, spectrum the matching singular
/// values. Data of rank < k is completed with further orthonormal directions
/// (zero spectrum) and flagged rank_deficient.
inline GenerativeModel train_pca(const std::vector<ComplexVector>& dataset, std::size_t k) {
    const std::size_t count = dataset.size();
    if (count < 2) throw ParameterError("train_pca: need at least 2 samples");
    const std::size_t n = dataset.front().size();
    if (n == 0) throw DimensionError("train_pca: empty samples");
    for (const ComplexVector& f : dataset)
        if (f.size() != n) throw DimensionError("train_pca: ragged dataset");
    if (k < 1 || k >= std::min(n, count))
        throw ParameterError("train_pca: k must satisfy 1 <= k < min(n, N)");

    Eigen::MatrixXcd x(n, count);
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t t = 0; t < n; ++t) x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = dataset[j][t];

    const Eigen::VectorXcd mean = x.rowwise().mean();
    x.colwise() -= mean;

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(x, Eigen::ComputeThinU);
    const Eigen::MatrixXcd& u = svd.matrixU();
    const Eigen::VectorXd& sv = svd.singularValues();

    GenerativeModel model;
    model.n = n;
    model.k = k;
    model.mean.resize(n);
    for (std::size_t t = 0; t < n; ++t) model.mean[t] = mean(static_cast<Eigen::Index>(t));
    model.basis = ComplexMatrix(n, k);
    model.spectrum.resize(k);
    const double rank_tol = static_cast<double>(std::max(n, count)) * 1e-15 * (sv.size() > 0 ? sv(0) : 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const double s = sv(static_cast<Eigen::Index>(c));
        model.spectrum[c] = std::max(s, 0.0);
        if (s <= rank_tol) model.rank_deficient = true;
        for (std::size_t r = 0; r < n; ++r)
            model.basis.at(r, c) = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    return model;
}

/// G z + b
inline ComplexVector generate(const GenerativeModel& model, const ComplexVector& z) {
    if (z.size() != model.k)
        throw DimensionError("generate: latent length " + std::to_string(z.size()) +
                             " != k = " + std::to_string(model.k));
    ComplexVector f = matvec(model.basis, z);
    for (std::size_t t = 0; t < model.n; ++t) f[t] += model.mean[t];
    return f;
}

/// Closed-form least-squares latent: z0 = G^H (f - b). The residual
/// f - generate(project(f)) is orthogonal to range(G).
inline ComplexVector project(const GenerativeModel& model, const ComplexVector& f) {
    if (f.size() != model.n)
        throw DimensionError("project: signal length " + std::to_string(f.size()) +
                             " != n = " + std::to_string(model.n));
    ComplexVector centered(model.n);
    for (std::size_t t = 0; t < model.n; ++t) centered[t] = f[t] - model.mean[t];
    return matvec_adjoint(model.basis, centered);
}

/// Distance from f to the model's range: ||generate(project(f)) - f||_2.
inline double bias_of(const GenerativeModel& model, const ComplexVector& f) {
    const ComplexVector nearest = generate(model, project(model, f));
    double acc = 0.0;
    for (std::size_t t = 0; t < model.n; ++t) acc += std::norm(nearest[t] - f[t]);
    return std::sqrt(acc);
}

/// Draws an in-distribution latent: component i is complex Gaussian with
/// per-component standard deviation spectrum[i] / sqrt(n_train), the empirical
/// scale of the PCA coefficients. Deterministic per seed.
inline ComplexVector sample_latent(const GenerativeModel& model, std::uint64_t seed,
                                   std::size_t n_train) {
    if (n_train < 2) throw ParameterError("sample_latent: n_train must be >= 2");
    Rng rng(seed);
    ComplexVector z(model.k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_train));
    for (std::size_t i = 0; i < model.k; ++i)
        z[i] = rng.complex_gaussian(model.spectrum[i] * scale);
    return z;
}

/// Text format: header `n k`, then b as n lines `re im`, then G row-major as
/// n*k lines `re im`, then the spectrum as k lines. 17 significant digits, so
/// round-trips preserve all invariants.
inline void save_model(const GenerativeModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    out << model.n << ' ' << model.k << '\n';
    for (const Complex& c : model.mean) {
        put(c.real());
        out << ' ';
        put(c.imag());
        out << '\n';
    }
    for (std::size_t r = 0; r < model.n; ++r)
        for (std::size_t c = 0; c < model.k; ++c) {
            put(model.basis.at(r, c).real());
            out << ' ';
            put(model.basis.at(r, c).imag());
            out << '\n';
        }
    for (double s : model.spectrum) {
        put(s);
        out << '\n';
    }
    if (!out) throw FileError("write failed: " + path);
}

inline GenerativeModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    GenerativeModel model;
    if (!(in >> model.n >> model.k)) throw ParseError("model file: malformed header in " + path);
    if (model.n == 0 || model.k == 0) throw ParseError("model file: zero dimension in " + path);
    auto read_complex = [&](Complex& c, const char* what) {
        double re = 0.0, im = 0.0;
        if (!(in >> re >> im)) throw ParseError(std::string("model file: truncated ") + what + " in " + path);
        c = Complex{re, im};
    };
    model.mean.resize(model.n);
    for (Complex& c : model.mean) read_complex(c, "mean");
    model.basis = ComplexMatrix(model.n, model.k);
    for (std::size_t r = 0; r < model.n; ++r)
        for (std::size_t c = 0; c < model.k; ++c) read_complex(model.basis.at(r, c), "basis");
    model.spectrum.resize(model.k);
    for (double& s : model.spectrum)
        if (!(in >> s)) throw ParseError("model file: truncated spectrum in " + path);
    detail::check_model_invariants(model);
    return model;
}

}  // namespace phasegen
