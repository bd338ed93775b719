#pragma once

// Elementary number theory: factorization, multiplicative functions,
// Kronecker symbols, real Dirichlet characters and their L-values.

#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace quadcone {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using Rational = boost::rational<i64>;

namespace arith {

struct Factorization {
    u64 n = 1;
    std::vector<std::pair<u64, int>> factors;  // strictly increasing primes

    std::vector<u64> primes() const;
    u64 radical() const;
};

/// Deterministic factorization for 1 <= n < 2^63.
Factorization factorize(u64 n);
bool is_prime(u64 n);

i64 gcd(i64 a, i64 b);
i64 lcm(i64 a, i64 b);
/// Least nonnegative residue.
inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}
u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 a, u64 e, u64 m);
/// Inverse of a modulo m; throws std::domain_error if gcd(a,m) != 1.
i64 invmod(i64 a, i64 m);
i64 ipow(i64 b, int e);
/// floor(sqrt(n)) for n >= 0.
u64 isqrt(u64 n);
bool is_square(i64 n);
/// p-adic valuation of n != 0.
int valuation(i64 n, i64 p);
std::vector<i64> divisors(i64 n);
std::vector<i64> primes_up_to(i64 n);

int mobius(u64 n);
u64 euler_phi(u64 n);

struct MuPhiTheta {
    int mu;
    u64 phi;
    Rational theta1;
};
MuPhiTheta mu_phi_theta1(u64 n);

/// θ₂(n) = θ₁(n)·∏_{p∤n}(1−p⁻²), via ζ(2).
double theta2(u64 n, double tol = 1e-12);

/// Σ_{a mod q, (a,q)=1} e(am/q).
i64 ramanujan_sum(i64 q, i64 m);

int kronecker(i64 a, i64 n);

/// Squarefree part (sign kept), e.g. -12 -> -3.
i64 squarefree_part(i64 n);
/// Discriminant of Q(√n) for n not a square.
i64 fundamental_discriminant(i64 n);
bool is_fundamental_discriminant(i64 D);

/// Real Dirichlet character χ₀[principal]·(D/·), D = 1 meaning no Kronecker part.
struct DirichletCharacter {
    i64 principal = 1;
    i64 D = 1;

    static DirichletCharacter trivial_mod(i64 L) { return {L, 1}; }
    static DirichletCharacter kronecker_of(i64 D) { return {1, D}; }

    i64 modulus() const;
    bool is_principal() const;
    int operator()(i64 n) const;
};

/// The real characters mod L; these are all characters exactly when L | 24.
std::vector<DirichletCharacter> real_characters(i64 L);

/// 𝕃(s,χ) = Σ χ(n) n^{-s} for s = 1 (χ non-principal) or s > 1.
double dirichlet_L(const DirichletCharacter& chi, double s, double tol = 1e-12);

}  // namespace arith
}  // namespace quadcone
