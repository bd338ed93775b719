#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "quadcone/brauer.hpp"

using namespace quadcone;
using namespace quadcone::brauer;
using quadform::QuadraticForm;

namespace {

QuadraticForm form_a() { return quadform::diagonal(1, 1, 1, -1); }
QuadraticForm form_b() { return quadform::diagonal(1, 1, -1, -3); }

// z² = ax² + by² has a primitive solution mod p^K
bool soluble_mod(i64 a, i64 b, i64 p, int K) {
    i64 q = arith::ipow(p, K);
    std::vector<char> sq(q, 0), unit_sq(q, 0);
    for (i64 z = 0; z < q; ++z) {
        sq[z * z % q] = 1;
        if (z % p) unit_sq[z * z % q] = 1;
    }
    a = arith::mod(a, q);
    b = arith::mod(b, q);
    for (i64 x = 0; x < q; ++x)
        for (i64 y = 0; y < q; ++y) {
            i64 t = (a * x % q * x + b * y % q * y) % q;
            bool prim_xy = x % p || y % p;
            if (prim_xy ? sq[t] : unit_sq[t]) return true;
        }
    return false;
}

// strip square factors of p
i64 strip(i64 a, i64 p) {
    while (a % (p * p) == 0) a /= p * p;
    return a;
}

std::vector<Vec4> global_points(const QuadraticForm& F, const Vec4& G, i64 L, i64 R) {
    std::vector<Vec4> out;
    Vec4 x;
    for (x[0] = -R; x[0] <= R; ++x[0])
        for (x[1] = -R; x[1] <= R; ++x[1])
            for (x[2] = -R; x[2] <= R; ++x[2])
                for (x[3] = -R; x[3] <= R; ++x[3]) {
                    if (F(x) != 0) continue;
                    i64 g = 0;
                    bool ok = true;
                    for (int i = 0; i < 4; ++i) {
                        g = std::gcd(g, x[i]);
                        ok = ok && arith::mod(x[i] - G[i], L) == 0;
                    }
                    if (ok && g == 1) out.push_back(x);
                }
    return out;
}

}  // namespace

TEST_CASE("Hilbert symbol examples") {
    CHECK(hilbert_symbol(-1, -1, Place::infinity()) == -1);
    CHECK(hilbert_symbol(-1, -1, Place::prime(2)) == -1);
    CHECK(hilbert_symbol(2, 3, Place::prime(3)) == -1);
    CHECK(hilbert_symbol(2, 3, Place::prime(3)) == arith::kronecker(2, 3));
    // z² + x² + y² ≡ 0 mod 8 only with all even
    CHECK_FALSE(soluble_mod(-1, -1, 2, 3));
    CHECK(invariant_of_symbol(-1) == Rational(1, 2));
    CHECK(invariant_of_symbol(1) == Rational(0));
}

TEST_CASE("Hilbert reciprocity and bimultiplicativity") {
    std::mt19937_64 rng(11);
    auto rnd = [&] {
        i64 v = 0;
        while (v == 0) v = (i64)(rng() % 20001) - 10000;
        return v;
    };
    for (int t = 0; t < 500; ++t) {
        i64 a = rnd(), b = rnd();
        int prod = hilbert_symbol(a, b, Place::infinity());
        for (u64 p : arith::factorize((u64)(2 * std::abs(a) * std::abs(b))).primes()) prod *= hilbert_symbol(a, b, Place::prime(p));
        CHECK(prod == 1);
        // symbols vanish at primes not dividing 2ab
        CHECK(hilbert_symbol(a, b, Place::prime(10007)) == 1);
    }
    for (int t = 0; t < 200; ++t) {
        i64 a = rnd() % 300, a2 = rnd() % 300, b = rnd();
        if (!a || !a2) continue;
        for (u64 p : {0, 2, 3, 5, 7, 13}) {
            Place v{p};
            CHECK(hilbert_symbol(a * a2, b, v) == hilbert_symbol(a, b, v) * hilbert_symbol(a2, b, v));
            CHECK(hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v));
        }
    }
}

TEST_CASE("symbol agrees with solubility") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        i64 p = std::vector<i64>{2, 3, 5, 7, 11, 13}[t % 6];
        i64 a = 0, b = 0;
        while (!a) a = (i64)(rng() % 201) - 100;
        while (!b) b = (i64)(rng() % 201) - 100;
        a = strip(a, p);
        b = strip(b, p);
        int K = p == 2 ? 5 : 3;
        bool sol = soluble_mod(a, b, p, K);
        CHECK((hilbert_symbol(a, b, Place::prime((u64)p)) == 1) == sol);
    }
}

TEST_CASE("local invariants against global points") {
    auto F = form_a();
    auto pt = quadform::find_point_and_tangent(F, 10);
    CHECK(pt.g == Vec4{1, 0, 0, -1});
    struct Case {
        i64 L;
        Vec4 G;
    };
    for (Case c : {Case{4, {1, 0, 0, 1}}, Case{4, {0, 1, 0, 1}}, Case{12, {1, 0, 0, 1}}, Case{12, {4, 3, 0, 5}},
                   Case{8, {1, 0, 0, 1}}, Case{8, {3, 4, 0, 5}}}) {
        auto cd = expsums::make_congruence(F, c.L, c.G);
        auto pts = global_points(F, c.G, c.L, 13);
        REQUIRE(!pts.empty());
        for (u64 p : relevant_primes(F, pt.g, c.L)) {
            auto inv = invariant_at_p(F, pt.g, p, cd);
            for (auto& x : pts) {
                i64 gx = dot(pt.g, x);
                if (gx == 0) continue;
                CHECK(inv == invariant_of_symbol(hilbert_symbol(F.disc, gx, Place::prime(p))));
            }
        }
        // reciprocity for the global points: the pair of each point's component meets the set
        auto ev = evaluate(F, pt.g, cd);
        for (auto& x : pts) CHECK(ev.xi[F.component_of(x)] == 2);
    }
    // mod 3 says nothing at 2, and inv_2 is not constant on all of 𝒲^o(Z_2)
    CHECK_THROWS_AS(invariant_at_p(F, pt.g, 2, expsums::make_congruence(F, 3, {1, 0, 0, 1})), NotLocallyConstantError);
    // a good prime carries no invariant
    auto cd = expsums::make_congruence(F, 4, {1, 0, 0, 1});
    CHECK(invariant_at_p(F, pt.g, 5, cd) == Rational(0));
    CHECK(invariant_at_p(F, pt.g, 7, cd) == Rational(0));
    CHECK(invariant_at_p(F, pt.g, 2, cd) == Rational(1, 2));
    CHECK(invariant_at_infinity(F, pt.g, 0) == Rational(1, 2));
    CHECK(invariant_at_infinity(F, pt.g, 1) == Rational(0));
    // distinct seeds agree
    for (u64 s = 2; s < 6; ++s) {
        LocalOptions o;
        o.seed = s;
        CHECK(invariant_at_p(F, pt.g, 2, cd, o) == Rational(1, 2));
    }
}

TEST_CASE("obstruction decisions") {
    auto F = form_a();
    auto pt = quadform::find_point_and_tangent(F, 10);
    auto base = expsums::make_congruence(F, 4, {1, 0, 0, 1});
    CHECK(xi_density(F, pt.g, base, 0) == 2);
    CHECK(xi_density(F, pt.g, base, 1) == 0);
    CHECK_FALSE(obstructed_by_character(F, pt.g, base, 0, 1));
    CHECK(obstructed_by_character(F, pt.g, base, 0, 3));
    CHECK(xi_density(F, pt.g, expsums::twist(F, base, 3), 0) == 0);
    CHECK(xi_density(F, pt.g, expsums::twist(F, base, 3), 1) == 2);
    CHECK_THROWS_AS(obstructed_by_character(F, pt.g, base, 1, 3), std::invalid_argument);
    auto l2 = expsums::make_congruence(F, 2, {1, 0, 0, 1});
    CHECK_THROWS_AS(obstructed_by_character(F, pt.g, l2, 0, 1), std::invalid_argument);

    // twist families: the character rule and the full evaluation agree
    std::mt19937_64 rng(2);
    int done = 0;
    for (auto G : {form_a(), form_b()}) {
        auto tp = quadform::find_point_and_tangent(G, 10);
        for (i64 L : {G.conductor, 2 * G.conductor}) {
            auto cls = expsums::cone_classes(G, L);
            for (int t = 0; t < 6; ++t) {
                auto cd = expsums::make_congruence(G, L, cls[rng() % cls.size()]);
                BrauerEvaluation ev;
                try {
                    ev = evaluate(G, tp.g, cd);
                } catch (const InsolubleError&) {
                    continue;
                }
                if (ev.components == 2) CHECK(ev.xi[0] + ev.xi[1] == 2);
                int comp = ev.xi[0] == 2 ? 0 : 1;
                if (comp >= ev.components) continue;
                for (i64 d = 1; d < L; ++d) {
                    if (std::gcd(d, L) != 1) continue;
                    bool obs = obstructed_by_character(G, tp.g, cd, comp, d);
                    CHECK(obs == (xi_density(G, tp.g, expsums::twist(G, cd, d), comp) == 0));
                    ++done;
                }
            }
        }
    }
    CHECK(done >= 20);
}
