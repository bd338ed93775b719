#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "quadcone/cyclo.hpp"

using namespace quadcone;

TEST_CASE("cyclotomic polynomials") {
    CHECK(cyclotomic_polynomial(1) == std::vector<i64>{-1, 1});
    CHECK(cyclotomic_polynomial(4) == std::vector<i64>{1, 0, 1});
    CHECK(cyclotomic_polynomial(6) == std::vector<i64>{1, -1, 1});
    CHECK(cyclotomic_polynomial(12) == std::vector<i64>{1, 0, -1, 0, 1});
    for (i64 N = 1; N <= 300; ++N) CHECK((u64)cyclotomic_polynomial(N).size() - 1 == arith::euler_phi(N));
    // Φ_105 is the first with a coefficient of absolute value 2
    auto p = cyclotomic_polynomial(105);
    i64 mx = 0;
    for (auto v : p) mx = std::max(mx, std::abs(v));
    CHECK(mx == 2);
}

TEST_CASE("relations among roots of unity") {
    // Σ_{j} ζ_N^j = 0 for N > 1
    for (i64 N = 2; N <= 60; ++N) {
        CycloInt s(N);
        for (i64 j = 0; j < N; ++j) s.add_power(j, 1);
        CHECK(s.is_zero());
        CHECK(s == CycloInt::integer(N, 0));
    }
    // Gauss sum squared: (Σ_a (a/p) ζ_p^a)^2 = (−1/p) p
    for (i64 p : {3, 5, 7, 11, 13}) {
        CycloInt g(p);
        for (i64 a = 1; a < p; ++a) g.add_power(a, arith::kronecker(a, p));
        auto g2 = g * g;
        CHECK(g2.as_integer().value() == arith::kronecker(-1, p) * p);
        CHECK(!g.as_integer().has_value());
    }
    // Ramanujan sums are rational
    for (i64 q = 1; q <= 40; ++q)
        for (i64 m = -5; m <= 5; ++m) {
            CycloInt s(q);
            for (i64 a = 0; a < q; ++a)
                if (arith::gcd(a, q) == 1) s.add_power(a * m, 1);
            CHECK(s.as_integer().value() == arith::ramanujan_sum(q, m));
        }
}

TEST_CASE("ring operations agree with complex evaluation") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 200; ++t) {
        i64 N = (i64)(rng() % 30) + 1, M = N * ((i64)(rng() % 4) + 1);
        CycloInt a(N), b(M);
        for (i64 j = 0; j < N; ++j) a.add_power(j, (i64)(rng() % 7) - 3);
        for (i64 j = 0; j < M; ++j) b.add_power(j, (i64)(rng() % 7) - 3);
        auto s = a + b, p = a * b;
        CHECK(std::abs(s.to_complex() - (a.to_complex() + b.to_complex())) < 1e-9);
        CHECK(std::abs(p.to_complex() - a.to_complex() * b.to_complex()) < 1e-8);
        CHECK(std::abs(a.rotated(3).to_complex() - a.to_complex() * std::polar(1.0, 2 * M_PI * 3 / N)) < 1e-9);
        CHECK(a.lifted(M) == a);
        CHECK((a - a).is_zero());
        i64 k = (i64)(rng() % 100);
        if (arith::gcd(k, N) == 1) {
            // Galois action commutes with products
            CHECK((a * a).galois(k) == a.galois(k) * a.galois(k));
        }
        // the exponent-vector representation is redundant; reduction decides equality
        CycloInt z(N);
        if (N > 1) {
            for (i64 j = 0; j < N; ++j) z.add_power(j, 5);
            CHECK(a + z == a);
        }
    }
}
