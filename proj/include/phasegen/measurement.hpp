// Masked Fourier measurements. The linear map A stacks one unitary DFT of the
// probe-masked signal per probe; the intensity map is f -> |Af|^2. Also
// supplies the Wirtinger gradient of the data-fit term for the optimizer.
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "numerics.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace phasegen {

/// A set of binary probe patterns. Entries are 0/1, every probe has at least
/// one nonzero entry, and the generating seed is retained for serialization.
struct ProbeSet {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<RealVector> probes;  // values exactly 0.0 or 1.0

    std::size_t count() const { return probes.size(); }
};

/// Draws `count` i.i.d. Bernoulli(1/2) probes of length n. All-zero probes are
/// redrawn so that every probe passes some light. Deterministic per seed.
inline ProbeSet make_probes(std::size_t count, std::size_t n, std::uint64_t seed) {
    if (count < 1) throw ParameterError("make_probes: probe count must be >= 1");
    if (n < 1) throw ParameterError("make_probes: dimension must be >= 1");
    Rng rng(seed);
    ProbeSet ps;
    ps.n = n;
    ps.seed = seed;
    ps.probes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        RealVector probe(n);
        bool any = false;
        do {
            any = false;
            for (std::size_t t = 0; t < n; ++t) {
                probe[t] = static_cast<double>(rng.bit());
                any = any || probe[t] != 0.0;
            }
        } while (!any);
        ps.probes.push_back(std::move(probe));
    }
    return ps;
}

/// Text format: header `n count seed`, then one line of n space-separated 0/1
/// digits per probe. Round-trips bit-exactly.
inline void save_probes(const ProbeSet& ps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << ps.n << ' ' << ps.count() << ' ' << ps.seed << '\n';
    for (const RealVector& probe : ps.probes) {
        for (std::size_t t = 0; t < probe.size(); ++t) {
            if (t) out << ' ';
            out << (probe[t] != 0.0 ? '1' : '0');
        }
        out << '\n';
    }
    if (!out) throw FileError("write failed: " + path);
}

inline ProbeSet load_probes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open: " + path);
    ProbeSet ps;
    std::size_t count = 0;
    if (!(in >> ps.n >> count >> ps.seed))
        throw ParseError("probe file: malformed header in " + path);
    if (ps.n < 1 || count < 1) throw ParseError("probe file: invalid dimensions in " + path);
    ps.probes.assign(count, RealVector(ps.n));
    for (std::size_t i = 0; i < count; ++i) {
        bool any = false;
        for (std::size_t t = 0; t < ps.n; ++t) {
            int digit = 0;
            if (!(in >> digit) || (digit != 0 && digit != 1))
                throw ParseError("probe file: bad entry at probe " + std::to_string(i) + " in " +
                                 path);
            ps.probes[i][t] = static_cast<double>(digit);
            any = any || digit != 0;
        }
        if (!any) throw DataError("probe file: all-zero probe " + std::to_string(i) + " in " + path);
    }
    return ps;
}

/// The measurement operator built from a probe set. Immutable after
/// construction; all member functions are const and thread-safe.
class MeasurementOperator {
public:
    explicit MeasurementOperator(ProbeSet ps) : probes_(std::move(ps)) {
        for (const RealVector& p : probes_.probes)
            if (p.size() != probes_.n)
                throw DimensionError("MeasurementOperator: probe length mismatch");
    }

    std::size_t signal_dim() const { return probes_.n; }
    std::size_t probe_count() const { return probes_.count(); }
    std::size_t measurement_dim() const { return probes_.n * probes_.count(); }
    const ProbeSet& probes() const { return probes_; }

    /// A f: block i is dft(a_i .* f). Linear in f.
    ComplexVector apply(const ComplexVector& f) const {
        check_signal(f.size());
        const std::size_t n = probes_.n;
        ComplexVector out(measurement_dim());
        ComplexVector masked(n);
        for (std::size_t i = 0; i < probes_.count(); ++i) {
            const RealVector& a = probes_.probes[i];
            for (std::size_t t = 0; t < n; ++t) masked[t] = a[t] * f[t];
            ComplexVector block = dft(masked);
            std::copy(block.begin(), block.end(), out.begin() + static_cast<std::ptrdiff_t>(i * n));
        }
        return out;
    }

    /// A^H g = sum_i a_i .* idft(g_i). Satisfies <Af, g> == <f, A^H g>.
    ComplexVector apply_adjoint(const ComplexVector& g) const {
        check_measurement(g.size());
        const std::size_t n = probes_.n;
        ComplexVector out(n, Complex{0.0, 0.0});
        ComplexVector block(n);
        for (std::size_t i = 0; i < probes_.count(); ++i) {
            std::copy(g.begin() + static_cast<std::ptrdiff_t>(i * n),
                      g.begin() + static_cast<std::ptrdiff_t>((i + 1) * n), block.begin());
            ComplexVector back = idft(block);
            const RealVector& a = probes_.probes[i];
            for (std::size_t t = 0; t < n; ++t) out[t] += a[t] * back[t];
        }
        return out;
    }

    /// Intensity map |Af|^2. Invariant under a global phase of f.
    RealVector forward(const ComplexVector& f) const {
        const ComplexVector af = apply(f);
        RealVector out(af.size());
        for (std::size_t j = 0; j < af.size(); ++j) out[j] = std::norm(af[j]);
        return out;
    }

    /// Gradient of ||forward(f) - y||^2 in real-stacked coordinates.
    /// With u = Af and r = |u|^2 - y, the complex form is 4 A^H (r .* u).
    RealVector datafit_gradient(const ComplexVector& f, const RealVector& y) const {
        check_signal(f.size());
        if (y.size() != measurement_dim())
            throw DimensionError("datafit_gradient: data length " + std::to_string(y.size()) +
                                 " != measurement dim " + std::to_string(measurement_dim()));
        ComplexVector u = apply(f);
        for (std::size_t j = 0; j < u.size(); ++j) u[j] *= std::norm(u[j]) - y[j];  // r .* u
        ComplexVector g = apply_adjoint(u);
        for (Complex& c : g) c *= 4.0;
        return real_stack(g);
    }

private:
    void check_signal(std::size_t len) const {
        if (len != probes_.n)
            throw DimensionError("measurement: signal length " + std::to_string(len) +
                                 " != n = " + std::to_string(probes_.n));
    }
    void check_measurement(std::size_t len) const {
        if (len != measurement_dim())
            throw DimensionError("measurement: vector length " + std::to_string(len) +
                                 " != m = " + std::to_string(measurement_dim()));
    }

    ProbeSet probes_;
};

}  // namespace phasegen
