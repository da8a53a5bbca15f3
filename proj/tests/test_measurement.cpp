#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "phasegen/measurement.hpp"
#include "phasegen/rng.hpp"

using namespace phasegen;

namespace {

ComplexVector random_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    ComplexVector v(n);
    for (Complex& c : v) c = rng.complex_gaussian(1.0);
    return v;
}

ProbeSet explicit_probes(std::size_t n, std::vector<std::vector<int>> rows) {
    ProbeSet ps;
    ps.n = n;
    ps.seed = 0;
    for (const auto& r : rows) {
        RealVector probe(r.begin(), r.end());
        ps.probes.push_back(probe);
    }
    return ps;
}

}  // namespace

TEST_CASE("make_probes basic contract") {
    const ProbeSet ps = make_probes(100, 64, 7);
    CHECK(ps.count() == 100);
    CHECK(ps.n == 64);
    CHECK(MeasurementOperator(ps).measurement_dim() == 6400);
    for (const RealVector& probe : ps.probes) {
        bool any = false;
        for (double v : probe) {
            CHECK((v == 0.0 || v == 1.0));
            any = any || v != 0.0;
        }
        CHECK(any);
    }
}

TEST_CASE("make_probes redraws the all-zero probe") {
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
        const ProbeSet ps = make_probes(1, 1, seed);
        REQUIRE(ps.probes.size() == 1);
        CHECK(ps.probes[0] == RealVector{1.0});
    }
}

TEST_CASE("make_probes is deterministic") {
    const ProbeSet a = make_probes(3, 8, 42);
    const ProbeSet b = make_probes(3, 8, 42);
    CHECK(a.probes == b.probes);
}

TEST_CASE("make_probes rejects bad parameters") {
    CHECK_THROWS_AS(make_probes(0, 4, 1), ParameterError);
    CHECK_THROWS_AS(make_probes(4, 0, 1), ParameterError);
}

TEST_CASE("probe file round-trips bit-exactly") {
    const ProbeSet ps = make_probes(5, 12, 2024);
    const std::string path = (std::filesystem::temp_directory_path() / "probes_rt.txt").string();
    save_probes(ps, path);
    const ProbeSet back = load_probes(path);
    CHECK(back.n == ps.n);
    CHECK(back.seed == ps.seed);
    CHECK(back.probes == ps.probes);
    std::remove(path.c_str());
}

TEST_CASE("apply is linear and zero maps to zero") {
    const MeasurementOperator op(make_probes(3, 8, 5));
    const ComplexVector zero(8, Complex{0.0, 0.0});
    for (const Complex& c : op.apply(zero)) CHECK(std::abs(c) == 0.0);

    const ComplexVector u = random_vector(8, 11), v = random_vector(8, 12);
    const Complex a{0.3, -0.8}, b{1.1, 0.2};
    ComplexVector combo(8);
    for (std::size_t t = 0; t < 8; ++t) combo[t] = a * u[t] + b * v[t];
    const ComplexVector lhs = op.apply(combo);
    const ComplexVector au = op.apply(u), av = op.apply(v);
    for (std::size_t j = 0; j < lhs.size(); ++j)
        CHECK(std::abs(lhs[j] - (a * au[j] + b * av[j])) < 1e-12);
}

TEST_CASE("apply with an all-ones mask is the DFT") {
    const ProbeSet ps = explicit_probes(4, {{1, 1, 1, 1}});
    const MeasurementOperator op(ps);
    const ComplexVector f = random_vector(4, 3);
    const ComplexVector got = op.apply(f);
    const ComplexVector want = dft(f);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(got[j] - want[j]) < 1e-14);
}

TEST_CASE("apply matches the dense matrix oracle") {
    const ProbeSet ps = explicit_probes(2, {{1, 0}, {1, 1}});
    const MeasurementOperator op(ps);
    const ComplexVector f{Complex{1.0, 0.0}, Complex{0.0, 1.0}};
    const auto dense = oracle::dense_A(ps);
    const ComplexVector want = oracle::dense_apply(dense, f);
    const ComplexVector got = op.apply(f);
    REQUIRE(got.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(got[j] - want[j]) < 1e-14);
}

TEST_CASE("apply_adjoint matches the dense matrix oracle") {
    const ProbeSet ps = explicit_probes(2, {{0, 1}, {1, 1}});
    const MeasurementOperator op(ps);
    const ComplexVector g = random_vector(4, 9);
    const auto dense = oracle::dense_A(ps);
    const ComplexVector want = oracle::dense_apply_adjoint(dense, g);
    const ComplexVector got = op.apply_adjoint(g);
    for (std::size_t t = 0; t < 2; ++t) CHECK(std::abs(got[t] - want[t]) < 1e-13);

    const ComplexVector zero(4, Complex{0.0, 0.0});
    for (const Complex& c : op.apply_adjoint(zero)) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("adjoint identity on random pairs") {
    const MeasurementOperator op(make_probes(4, 16, 77));
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const ComplexVector f = random_vector(16, 1000 + trial);
        const ComplexVector g = random_vector(op.measurement_dim(), 2000 + trial);
        const ComplexVector af = op.apply(f);
        const Complex lhs = inner(af, g);
        const Complex rhs = inner(f, op.apply_adjoint(g));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * norm2(af) * norm2(g));
    }
}

TEST_CASE("forward is the squared modulus and phase invariant") {
    const ProbeSet single = explicit_probes(1, {{1}});
    const MeasurementOperator tiny(single);
    const RealVector out = tiny.forward(ComplexVector{Complex{3.0, 4.0}});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == Catch::Approx(25.0).margin(1e-12));

    const MeasurementOperator op(make_probes(2, 8, 21));
    const ComplexVector zero(8, Complex{0.0, 0.0});
    for (double v : op.forward(zero)) CHECK(v == 0.0);

    const ComplexVector f = random_vector(8, 31);
    const Complex phase = std::polar(1.0, 1.234);
    ComplexVector rotated(8);
    for (std::size_t t = 0; t < 8; ++t) rotated[t] = phase * f[t];
    const RealVector a = op.forward(f), b = op.forward(rotated);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == Catch::Approx(b[j]).margin(1e-11));

    // dense oracle on an explicit 2x2 case
    const ProbeSet ps = explicit_probes(2, {{1, 1}, {0, 1}});
    const MeasurementOperator small(ps);
    const ComplexVector fe{Complex{1.0, 0.0}, Complex{0.0, 1.0}};
    const ComplexVector dense = oracle::dense_apply(oracle::dense_A(ps), fe);
    const RealVector got = small.forward(fe);
    for (std::size_t j = 0; j < got.size(); ++j)
        CHECK(got[j] == Catch::Approx(std::norm(dense[j])).margin(1e-13));
}

TEST_CASE("operator norm bound ||Af|| <= sqrt(l) ||f||") {
    const MeasurementOperator op(make_probes(6, 16, 55));
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const ComplexVector f = random_vector(16, 3000 + trial);
        CHECK(norm2(op.apply(f)) <= std::sqrt(6.0) * norm2(f) * (1.0 + 1e-12));
    }
    // equality when every mask passes everything
    const ProbeSet ones = explicit_probes(4, {{1, 1, 1, 1}, {1, 1, 1, 1}});
    const MeasurementOperator full(ones);
    const ComplexVector f = random_vector(4, 4321);
    CHECK(norm2(full.apply(f)) == Catch::Approx(std::sqrt(2.0) * norm2(f)).epsilon(1e-12));
}

TEST_CASE("datafit gradient vanishes at the global minimum") {
    const MeasurementOperator op(make_probes(3, 8, 13));
    const ComplexVector f = random_vector(8, 17);
    const RealVector y = op.forward(f);
    const RealVector grad = op.datafit_gradient(f, y);
    CHECK(norm2(grad) < 1e-10);
}

TEST_CASE("datafit gradient matches central finite differences") {
    const MeasurementOperator op(make_probes(3, 8, 23));
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const ComplexVector f = random_vector(8, 500 + trial);
        Rng rng(600 + trial);
        RealVector y(op.measurement_dim());
        for (double& v : y) v = rng.gaussian();
        const RealVector got = op.datafit_gradient(f, y);
        const auto value = [&op, &y](const RealVector& u) {
            const RealVector fwd = op.forward(real_unstack(u));
            double acc = 0.0;
            for (std::size_t j = 0; j < fwd.size(); ++j) {
                const double r = fwd[j] - y[j];
                acc += r * r;
            }
            return acc;
        };
        const RealVector want = oracle::fd_gradient(value, real_stack(f), 1e-6);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i) {
            num += (got[i] - want[i]) * (got[i] - want[i]);
            den += want[i] * want[i];
        }
        CHECK(std::sqrt(num) <= 1e-5 * std::sqrt(den));
    }
}

TEST_CASE("datafit gradient norm is phase equivariant") {
    const MeasurementOperator op(make_probes(3, 8, 29));
    const ComplexVector f = random_vector(8, 71);
    const RealVector y = op.forward(random_vector(8, 72));
    ComplexVector rotated(8);
    const Complex phase = std::polar(1.0, 0.77);
    for (std::size_t t = 0; t < 8; ++t) rotated[t] = phase * f[t];
    CHECK(norm2(op.datafit_gradient(f, y)) ==
          Catch::Approx(norm2(op.datafit_gradient(rotated, y))).epsilon(1e-10));
}

TEST_CASE("dimension mismatches raise dimension errors") {
    const MeasurementOperator op(make_probes(2, 4, 1));
    CHECK_THROWS_AS(op.apply(ComplexVector(3)), DimensionError);
    CHECK_THROWS_AS(op.apply_adjoint(ComplexVector(7)), DimensionError);
    CHECK_THROWS_AS(op.forward(ComplexVector(5)), DimensionError);
    CHECK_THROWS_AS(op.datafit_gradient(ComplexVector(4), RealVector(3)), DimensionError);
}
