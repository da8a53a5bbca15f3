#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "phasegen/numerics.hpp"
#include "phasegen/rng.hpp"

using namespace phasegen;

namespace {

ComplexVector random_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    ComplexVector v(n);
    for (Complex& c : v) c = rng.complex_gaussian(1.0);
    return v;
}

double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
    double out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
    return out;
}

}  // namespace

TEST_CASE("dft of impulse is flat") {
    ComplexVector e0{1.0, 0.0, 0.0, 0.0};
    const ComplexVector out = dft(e0);
    for (const Complex& c : out) CHECK(std::abs(c - Complex{0.5, 0.0}) < 1e-15);
}

TEST_CASE("dft of constant is scaled impulse") {
    ComplexVector ones(4, Complex{1.0, 0.0});
    const ComplexVector out = dft(ones);
    CHECK(std::abs(out[0] - Complex{2.0, 0.0}) < 1e-15);
    for (std::size_t j = 1; j < 4; ++j) CHECK(std::abs(out[j]) < 1e-15);
}

TEST_CASE("dft of [1, i] matches direct summation") {
    // frozen from the O(n^2) oracle: (1/sqrt(2)) * [1+i, 1-i]
    const double s = 1.0 / std::sqrt(2.0);
    ComplexVector v{Complex{1.0, 0.0}, Complex{0.0, 1.0}};
    const ComplexVector out = dft(v);
    CHECK(std::abs(out[0] - Complex{s, s}) < 1e-14);
    CHECK(std::abs(out[1] - Complex{s, -s}) < 1e-14);
    CHECK(max_abs_diff(out, oracle::dft_direct(v)) < 1e-14);
}

TEST_CASE("dft matches the direct oracle on random input") {
    for (std::size_t n : {2u, 4u, 8u, 16u, 64u, 6u, 12u}) {
        const ComplexVector v = random_vector(n, 100 + n);
        const ComplexVector got = dft(v);
        const ComplexVector want = oracle::dft_direct(v);
        CHECK(max_abs_diff(got, want) < 1e-12 * std::max(1.0, norm2(v)));
    }
}

TEST_CASE("dft rejects the empty vector") {
    CHECK_THROWS_AS(dft(ComplexVector{}), DimensionError);
    CHECK_THROWS_AS(idft(ComplexVector{}), DimensionError);
}

TEST_CASE("idft inverts dft") {
    const ComplexVector v = random_vector(64, 7);
    const ComplexVector back = idft(dft(v));
    CHECK(max_abs_diff(back, v) < 1e-12 * norm2(v));

    ComplexVector flat(4, Complex{0.5, 0.0});
    const ComplexVector e0 = idft(flat);
    CHECK(std::abs(e0[0] - Complex{1.0, 0.0}) < 1e-15);
    for (std::size_t j = 1; j < 4; ++j) CHECK(std::abs(e0[j]) < 1e-15);

    ComplexVector imp{Complex{2.0, 0.0}, {}, {}, {}};
    const ComplexVector ones = idft(imp);
    for (const Complex& c : ones) CHECK(std::abs(c - Complex{1.0, 0.0}) < 1e-15);
}

TEST_CASE("dft is unitary (Parseval)") {
    for (std::size_t n : {2u, 8u, 64u}) {
        const ComplexVector v = random_vector(n, 200 + n);
        CHECK(std::abs(norm2(dft(v)) - norm2(v)) < 1e-12 * norm2(v));
    }
}

TEST_CASE("dft is linear") {
    const std::size_t n = 16;
    const ComplexVector u = random_vector(n, 1);
    const ComplexVector v = random_vector(n, 2);
    const Complex a{0.7, -1.3}, b{-0.2, 0.5};
    ComplexVector combo(n);
    for (std::size_t t = 0; t < n; ++t) combo[t] = a * u[t] + b * v[t];
    const ComplexVector lhs = dft(combo);
    const ComplexVector du = dft(u), dv = dft(v);
    ComplexVector rhs(n);
    for (std::size_t t = 0; t < n; ++t) rhs[t] = a * du[t] + b * dv[t];
    CHECK(max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("real_stack layout and round trip") {
    ComplexVector one{Complex{1.0, 2.0}};
    CHECK(real_stack(one) == RealVector{1.0, 2.0});

    ComplexVector zeros(2, Complex{0.0, 0.0});
    CHECK(real_stack(zeros) == RealVector{0.0, 0.0, 0.0, 0.0});

    const ComplexVector v = random_vector(30, 3);
    const ComplexVector back = real_unstack(real_stack(v));
    REQUIRE(back.size() == v.size());
    for (std::size_t t = 0; t < v.size(); ++t) CHECK(back[t] == v[t]);  // exact
}

TEST_CASE("real_stack is an isometry") {
    const ComplexVector v = random_vector(17, 4);
    CHECK(norm2(real_stack(v)) == Catch::Approx(norm2(v)).epsilon(1e-15));
}

TEST_CASE("real_unstack rejects odd lengths") {
    CHECK_THROWS_AS(real_unstack(RealVector{1.0, 2.0, 3.0}), DimensionError);
}

TEST_CASE("inner product basics") {
    ComplexVector e0{Complex{1.0, 0.0}, Complex{0.0, 0.0}};
    ComplexVector e1{Complex{0.0, 0.0}, Complex{1.0, 0.0}};
    CHECK(std::abs(inner(e0, e1)) == 0.0);

    ComplexVector v{Complex{3.0, 0.0}, Complex{0.0, 4.0}};
    CHECK(inner(v, v).real() == Catch::Approx(25.0));
    CHECK(inner(v, v).imag() == 0.0);

    CHECK_THROWS_AS(inner(e0, ComplexVector{Complex{1.0, 0.0}}), DimensionError);
}

TEST_CASE("inner product is Hermitian") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ComplexVector u = random_vector(9, 300 + seed);
        const ComplexVector v = random_vector(9, 400 + seed);
        CHECK(std::abs(inner(u, v) - std::conj(inner(v, u))) < 1e-13);
    }
}
