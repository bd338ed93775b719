#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "quadcone/expsums.hpp"

using namespace quadcone;
using namespace quadcone::expsums;
using quadform::QuadraticForm;

namespace {

QuadraticForm form_a() { return quadform::diagonal(1, 1, 1, -1); }
QuadraticForm form_b() { return quadform::diagonal(1, 1, -1, -3); }

std::complex<double> e(double x) { return std::polar(1.0, 2 * M_PI * x); }

// phased S_{q,L,λ}(c) straight from the definition
std::complex<double> naive_S(const QuadraticForm& F, i64 L, const Vec4& lam, i64 q, const Vec4& c) {
    i64 N = q * L;
    std::complex<double> s = 0;
    i64 Fl = F(lam);
    Vec4 g = F.grad(lam);
    Vec4 x;
    for (x[0] = 0; x[0] < N; ++x[0])
        for (x[1] = 0; x[1] < N; ++x[1])
            for (x[2] = 0; x[2] < N; ++x[2])
                for (x[3] = 0; x[3] < N; ++x[3]) {
                    i64 H = Fl / L + dot(g, x);
                    if (arith::mod(H, L)) continue;
                    for (i64 a = 1; a <= q; ++a) {
                        if (arith::gcd(a, q) != 1) continue;
                        s += e((double)arith::mod(a * (H + L * F(x)) + dot(c, x), N) / N);
                    }
                }
    return s * e((double)arith::mod(dot(c, lam), q * L * L) / (q * L * L));
}

std::complex<double> naive_plain(const QuadraticForm& F, i64 q, const Vec4& c) {
    std::complex<double> s = 0;
    Vec4 b;
    for (b[0] = 0; b[0] < q; ++b[0])
        for (b[1] = 0; b[1] < q; ++b[1])
            for (b[2] = 0; b[2] < q; ++b[2])
                for (b[3] = 0; b[3] < q; ++b[3])
                    for (i64 a = 1; a <= q; ++a)
                        if (arith::gcd(a, q) == 1) s += e((double)arith::mod(a * F(b) + dot(c, b), q) / q);
    return s;
}

}  // namespace

TEST_CASE("H values and the divisibility equivalence") {
    auto F = form_a();
    auto cong = make_congruence(F, 4, {1, 0, 0, 1});
    CHECK(H_value(F, cong, {0, 0, 0, 0}) == 0);
    CHECK(H_value(F, cong, {1, 0, 0, 0}) == 2);
    CHECK(H_value(F, cong, {2, 0, 0, 0}) == 4);
    CHECK(F({9, 0, 0, 1}) == 80);

    std::mt19937_64 rng(7);
    std::vector<QuadraticForm> forms{form_a(), form_b()};
    for (int t = 0; t < 10000; ++t) {
        auto& G = forms[t % 2];
        i64 L = (i64)(rng() % 12) + 1;
        Vec4 lam;
        do {
            for (auto& v : lam) v = (i64)(rng() % 41) - 20;
        } while (arith::mod(G(lam), L) != 0 || std::gcd(std::gcd(std::gcd(lam[0], lam[1]), std::gcd(lam[2], lam[3])), L) != 1);
        CongruenceData cd{L, lam, lam};
        Vec4 y;
        for (auto& v : y) v = (i64)(rng() % 61) - 30;
        Vec4 x{L * y[0] + lam[0], L * y[1] + lam[1], L * y[2] + lam[2], L * y[3] + lam[3]};
        bool lhs = arith::mod(H_value(G, cd, y), L) == 0;
        bool rhs = arith::mod(G(x), L * L) == 0;
        CHECK(lhs == rhs);
    }
}

TEST_CASE("congruence data") {
    auto F = form_a();
    CHECK_THROWS_AS(make_congruence(F, 4, {1, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(make_congruence(F, 4, {2, 0, 0, 2}), std::invalid_argument);
    auto cd = make_congruence(F, 4, {5, -4, 8, 1});
    CHECK(cd.lambda == Vec4{1, 0, 0, 1});
    auto cls = cone_classes(F, 4);
    for (auto& g : cls) CHECK(arith::mod(F(g), 4) == 0);
    // classes are stable under unit scaling
    for (auto& g : cls) {
        Vec4 h{arith::mod(3 * g[0], 4), arith::mod(3 * g[1], 4), arith::mod(3 * g[2], 4), arith::mod(3 * g[3], 4)};
        CHECK(std::find(cls.begin(), cls.end(), h) != cls.end());
    }
}

TEST_CASE("row-column transform agrees with single evaluations") {
    std::mt19937_64 rng(3);
    for (i64 N : {1, 2, 5, 6}) {
        std::vector<i64> g(N * N * N * N);
        for (auto& v : g) v = (i64)(rng() % 7) - 3;
        CBox box{2};
        auto all = transform_box(N, g, box);
        for (size_t i = 0; i < box.size(); i += 7) CHECK(all[i] == transform_one(N, g, box.at(i)));
        CHECK(box.index(box.at(123)) == 123);
    }
}

TEST_CASE("plain sums") {
    auto F = form_a();
    CHECK(S_q_plain(F, 1, {1, 2, 0, -1}).integer() == 1);
    CHECK(S_q_plain(F, 2, {0, 0, 0, 0}).integer() == 0);
    CHECK(S_q_plain(F, 3, {0, 0, 0, 0}).integer() == -18);
    for (auto G : {form_a(), form_b()})
        for (i64 q = 1; q <= 6; ++q)
            for (Vec4 c : {Vec4{0, 0, 0, 0}, Vec4{1, 0, 0, 0}, Vec4{1, -1, 2, 1}, Vec4{0, 2, 0, 2}}) {
                auto v = S_q_plain(G, q, c);
                CHECK(std::abs(v.numeric() - naive_plain(G, q, c)) < 1e-6);
                CHECK(v.integer().has_value());
            }
    CHECK_THROWS_AS(S_q_plain(F, 121, {0, 0, 0, 0}), RangeError);
}

TEST_CASE("closed forms at c = 0 and F*(c) = 0") {
    for (auto F : {form_a(), form_b()}) {
        for (i64 q = 1; q <= 60; ++q) {
            if (std::gcd(q, 2 * F.disc) != 1) continue;
            auto mpt = arith::mu_phi_theta1((u64)q);
            i64 expect = q * q * q * quadform::psi_F(F, q);
            CHECK(S_q_plain_multiplicative(F, q, {0, 0, 0, 0}) * mpt.theta1.denominator() ==
                  expect * mpt.theta1.numerator());
            i64 phi3 = (i64)arith::euler_phi((u64)(q * q * q));
            CHECK(R_sum(F, q, {0, 0, 0, 0}) == phi3 * quadform::psi_F(F, q));
        }
    }
    auto F = form_a();
    CHECK(R_sum(F, 3, {0, 0, 0, 0}) == -18);
    CHECK(R_sum(F, 5, {0, 0, 0, 0}) == 100);
    CHECK(R_sum(F, 3, {1, 0, 0, 0}) == 9);
    Vec4 iso{1, 0, 0, 1};
    CHECK(F.adjoint_value(iso) == 0);
    for (i64 q = 3; q <= 59; q += 2) CHECK(R_sum(F, q, iso) == (i64)arith::euler_phi((u64)(q * q * q)) * quadform::psi_F(F, q));
    CHECK_THROWS_AS(R_sum(F, 6, iso), std::invalid_argument);
}

TEST_CASE("multiplicativity of plain sums") {
    CBox box{2};
    for (auto F : {form_a(), form_b()}) {
        std::vector<std::vector<ExpSumValue>> S(21);
        for (i64 q = 1; q <= 20; ++q) S[q] = S_q_plain_box(F, q, box);
        for (i64 q1 = 2; q1 <= 20; ++q1)
            for (i64 q2 = q1 + 1; q1 * q2 <= 20; ++q2) {
                if (std::gcd(q1, q2) != 1) continue;
                for (size_t i = 0; i < box.size(); ++i) {
                    auto a = S[q1][i].integer(), b = S[q2][i].integer(), ab = S[q1 * q2][i].integer();
                    REQUIRE((a && b && ab));
                    CHECK(*ab == *a * *b);
                }
            }
    }
}

TEST_CASE("full sums: definition, specialization and modes") {
    auto F = form_a();
    // L = 1 reduces to the plain sum
    auto c1 = make_congruence(F, 1, {0, 0, 0, 0});
    CBox box{2};
    for (i64 q = 1; q <= 12; ++q) {
        auto a = S_full_box(F, c1, q, box, Mode::brute);
        auto b = S_q_plain_box(F, q, box);
        for (size_t i = 0; i < box.size(); ++i) CHECK(a[i] == b[i]);
    }
    // definition oracle
    for (auto G : {form_a(), form_b()})
        for (i64 L : {2, 3}) {
            auto cls = cone_classes(G, L);
            auto cd = make_congruence(G, L, cls.front());
            for (i64 q = 1; q * L <= 10; ++q)
                for (Vec4 c : {Vec4{0, 0, 0, 0}, Vec4{1, 0, -1, 0}, Vec4{2, 1, 0, -1}}) {
                    auto v = S_full(G, cd, q, c, Mode::brute);
                    CHECK(std::abs(v.numeric() - naive_S(G, L, cd.lambda, q, c)) < 1e-6);
                    CHECK(v.integer().has_value());
                    CHECK(S_full(G, cd, q, c, Mode::crt) == v);
                }
        }
    auto cd = make_congruence(F, 2, {1, 0, 1, 0});
    for (Vec4 c : {Vec4{0, 0, 0, 0}, Vec4{1, 1, 0, 0}}) {
        CHECK(S_full(F, cd, 3, c, Mode::brute) == S_full(F, cd, 3, c, Mode::crt));
        CHECK(S_full(F, cd, 10, c, Mode::brute) == S_full(F, cd, 10, c, Mode::crt));
    }
    CHECK_THROWS_AS(S_full(F, cd, 25, {0, 0, 0, 0}, Mode::brute), RangeError);
}

TEST_CASE("reconstruction through R and script S") {
    CBox box{1};
    for (auto F : {form_a(), form_b()})
        for (i64 L : {1, 2, 4}) {
            auto cls = cone_classes(F, L);
            auto cd = make_congruence(F, L, cls.back());
            for (i64 q = 1; q * L <= 24; ++q) {
                auto d = qdecomp(F, cd, q);
                auto lhs = S_full_box(F, cd, q, box, Mode::brute);
                auto sc = script_S_box(F, cd, d.q2, arith::mod(d.q1, L), box);
                for (size_t i = 0; i < box.size(); ++i) {
                    Vec4 c = box.at(i);
                    ExpSumValue rhs{sc[i].value.scaled(R_sum(F, d.q1, c)), 1};
                    CHECK(lhs[i] == rhs);
                }
            }
        }
}

TEST_CASE("closed form of the first factor") {
    CBox box{1};
    for (auto F : {form_a(), form_b()})
        for (i64 L : {2, 4}) {
            auto cd = make_congruence(F, L, cone_classes(F, L).front());
            for (i64 q1 : {5, 7, 11})
                for (i64 q : {q1, 2 * q1}) {
                    auto d = qdecomp(F, cd, q);
                    REQUIRE(d.q1 == q1);
                    auto direct = S1_direct_box(F, cd, q, box);
                    for (size_t i = 0; i < box.size(); ++i) CHECK(direct[i] == S1_closed(F, cd, q, box.at(i)));
                }
        }
}

TEST_CASE("Bezout choice does not matter") {
    CBox box{1};
    auto F = form_b();
    for (i64 L : {2, 4}) {
        auto cd = make_congruence(F, L, cone_classes(F, L)[1]);
        for (i64 q : {5, 6, 10}) {
            auto d = qdecomp(F, cd, q);
            CHECK(d.k2 * d.q1 + d.k1 * d.q2 * L == F(cd.lambda) / L);
            auto ref = S_full_box(F, cd, q, box, Mode::brute);
            for (i64 t : {-2, 1, 3}) {
                QDecomposition e = d;
                e.k2 += t * d.q2 * L;
                e.k1 -= t * d.q1;
                auto s1 = S1_direct_box_with(F, cd, e, box);
                auto s2 = S2_box_with(F, cd, e, box);
                for (size_t i = 0; i < box.size(); ++i) {
                    Vec4 c = box.at(i);
                    CycloInt prod = (s1[i].value * s2[i].value).lifted(q * L * L).rotated(dot(c, cd.lambda));
                    CHECK(ExpSumValue{prod, 1} == ref[i]);
                }
            }
        }
    }
}

TEST_CASE("character sums: periodicity, reconstruction and flipping") {
    auto F = form_a();
    auto cd = make_congruence(F, 4, {1, 0, 0, 1});
    Vec4 c{1, 0, 1, 0};
    CHECK(script_S(F, cd, 2, 3, c) == script_S(F, cd, 2, 7, c));
    auto c1 = make_congruence(F, 1, {0, 0, 0, 0});
    for (i64 q2 : {1, 2, 4, 8})
        for (Vec4 cc : {Vec4{0, 0, 0, 0}, Vec4{1, 2, 0, -1}}) {
            CHECK(script_S(F, c1, q2, 1, cc) == S_q_plain(F, q2, cc));
            CHECK(A_char(F, c1, q2, arith::DirichletCharacter::trivial_mod(1), cc) == S_q_plain(F, q2, cc));
        }
    auto chars = arith::real_characters(4);
    for (i64 q1 : {1, 3, 5, 7})
        for (Vec4 cc : {Vec4{0, 0, 0, 0}, Vec4{1, 0, 1, 0}, Vec4{2, -1, 0, 1}}) {
            ExpSumValue sum{CycloInt(1), 1};
            for (auto& chi : chars) {
                auto a = A_char(F, cd, 2, chi, cc);
                sum = ExpSumValue{sum.value.scaled(a.denominator) + a.value.scaled(chi(q1) * sum.denominator),
                                  sum.denominator * a.denominator};
            }
            CHECK(sum == script_S(F, cd, 2, q1, cc));
        }
    for (auto G : {form_a(), form_b()}) {
        i64 L = G.conductor;
        auto chars = arith::real_characters(L);
        auto cls = cone_classes(G, L);
        for (size_t k = 0; k < cls.size() && k < 4; ++k) {
            auto base = make_congruence(G, L, cls[k]);
            for (i64 d = 1; d < L; ++d) {
                if (std::gcd(d, L) != 1) continue;
                auto tw = twist(G, base, d);
                for (auto& chi : chars) {
                    auto a = A_char(G, base, 1, chi, {1, 0, 0, 0});
                    auto b = A_char(G, tw, 1, chi, {1, 0, 0, 0});
                    CHECK(b == ExpSumValue{a.value.scaled(chi(d)), a.denominator});
                }
            }
        }
    }
}

TEST_CASE("B coefficient") {
    auto F = form_a();
    auto c2 = make_congruence(F, 2, {1, 0, 0, 1});
    auto b0 = B_coeff(F, c2, {0, 0, 0, 0}, 1e-3);
    CHECK(b0.value == std::complex<double>(0, 0));
    CHECK(b0.u_values.empty());

    auto cd = make_congruence(F, 4, {1, 0, 0, 1});
    // the odd character kills c = 0
    CHECK(std::abs(B_coeff_truncated(F, cd, {0, 0, 0, 0}, 16).value) < 1e-12);
    Vec4 c0{2, 0, 0, 2};
    auto t8 = B_coeff_truncated(F, cd, c0, 8);
    auto t16 = B_coeff_truncated(F, cd, c0, 16);
    CHECK(t16.u_values == std::vector<i64>{1, 2, 4, 8, 16});
    // u = 1 term: (1/2)(𝒮(1;c) − 𝒮(3;c)) = 128i by a separate brute count
    CHECK(std::abs(t16.terms[0] - std::complex<double>(0, 128)) < 1e-9);
    CHECK(std::abs(t16.value - t8.value) <= t8.tail_estimate + 1e-12);
    auto tol = B_coeff(F, cd, c0, 1e-6);
    CHECK(tol.tail_estimate < 1e-6);
    CHECK(std::abs(tol.value - t16.value) < 1e-9);
    Limits small;
    small.q2L2_max = 16;
    CHECK_THROWS_AS(B_coeff(F, cd, c0, 1e-6, small), RangeError);

    for (Vec4 c : {Vec4{2, 0, 0, 2}, Vec4{-2, 0, 0, -2}, Vec4{1, 1, 0, 0}}) {
        auto base = B_coeff_truncated(F, cd, c, 16);
        auto tw = B_coeff_truncated(F, twist(F, cd, 3), c, 16);
        CHECK(std::abs(tw.value - (double)quadform::psi_F(F, 3) * base.value) < 1e-9);
    }
}
