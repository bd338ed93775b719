#include "quadcone/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <gsl/gsl_sf_psi.h>
#include <gsl/gsl_sf_zeta.h>

namespace quadcone::arith {

namespace {

constexpr u64 kTrialLimit = 1000000;

bool miller_rabin(u64 n, u64 a) {
    if (a % n == 0) return true;
    u64 d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < r; ++i) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

// Brent's cycle detection on x -> x^2 + c, c = 1, 2, ... until a proper factor shows up.
u64 rho_factor(u64 n) {
    if (n % 2 == 0) return 2;
    for (u64 c = 1;; ++c) {
        u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
        u64 r = 1;
        const u64 m = 128;
        auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
        do {
            x = y;
            for (u64 i = 0; i < r; ++i) y = f(y);
            u64 k = 0;
            do {
                ys = y;
                for (u64 i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                g = std::gcd(q, n);
                k += m;
            } while (k < r && g == 1);
            r <<= 1;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                g = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

void split(u64 n, std::vector<u64>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u64 d = rho_factor(n);
    split(d, out);
    split(n / d, out);
}

}  // namespace

std::vector<u64> Factorization::primes() const {
    std::vector<u64> ps;
    for (auto& [p, e] : factors) ps.push_back(p);
    return ps;
}

u64 Factorization::radical() const {
    u64 r = 1;
    for (auto& [p, e] : factors) r *= p;
    return r;
}

u64 mulmod(u64 a, u64 b, u64 m) { return (u64)((unsigned __int128)a * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

bool is_prime(u64 n) {
    if (n < 2) return false;
    static const u64 small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : small) {
        if (n % p == 0) return n == p;
    }
    for (u64 a : small) {
        if (!miller_rabin(n, a)) return false;
    }
    return true;
}

Factorization factorize(u64 n) {
    if (n == 0) throw std::domain_error("factorize: n must be positive");
    Factorization f;
    f.n = n;
    u64 m = n;
    auto take = [&](u64 p) {
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        if (e) f.factors.push_back({p, e});
    };
    take(2);
    for (u64 p = 3; p <= kTrialLimit && p * p <= m; p += 2) take(p);
    if (m > 1) {
        std::vector<u64> rest;
        split(m, rest);
        std::sort(rest.begin(), rest.end());
        for (size_t i = 0; i < rest.size();) {
            size_t j = i;
            while (j < rest.size() && rest[j] == rest[i]) ++j;
            f.factors.push_back({rest[i], int(j - i)});
            i = j;
        }
    }
    return f;
}

i64 gcd(i64 a, i64 b) { return std::gcd(a, b); }
i64 lcm(i64 a, i64 b) { return std::lcm(a, b); }

i64 invmod(i64 a, i64 m) {
    i64 r0 = mod(a, m), r1 = m, s0 = 1, s1 = 0;
    while (r1) {
        i64 q = r0 / r1;
        std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
        std::tie(s0, s1) = std::make_pair(s1, s0 - q * s1);
    }
    if (r0 != 1) throw std::domain_error("invmod: not invertible");
    return mod(s0, m);
}

i64 ipow(i64 b, int e) {
    i64 r = 1;
    while (e-- > 0) r *= b;
    return r;
}

u64 isqrt(u64 n) {
    u64 r = (u64)std::sqrt((double)n);
    while (r > 0 && (unsigned __int128)r * r > n) --r;
    while ((unsigned __int128)(r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_square(i64 n) {
    if (n < 0) return false;
    u64 r = isqrt((u64)n);
    return (i64)(r * r) == n;
}

int valuation(i64 n, i64 p) {
    if (n == 0) throw std::domain_error("valuation of zero");
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

std::vector<i64> divisors(i64 n) {
    std::vector<i64> ds{1};
    for (auto [p, e] : factorize((u64)n).factors) {
        size_t sz = ds.size();
        i64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= (i64)p;
            for (size_t i = 0; i < sz; ++i) ds.push_back(ds[i] * pk);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

std::vector<i64> primes_up_to(i64 n) {
    std::vector<i64> ps;
    if (n < 2) return ps;
    std::vector<bool> comp(n + 1, false);
    for (i64 i = 2; i <= n; ++i) {
        if (comp[i]) continue;
        ps.push_back(i);
        for (i64 j = i * i; j <= n; j += i) comp[j] = true;
    }
    return ps;
}

int mobius(u64 n) {
    int mu = 1;
    for (auto [p, e] : factorize(n).factors) {
        if (e > 1) return 0;
        mu = -mu;
    }
    return mu;
}

u64 euler_phi(u64 n) {
    u64 phi = n;
    for (auto [p, e] : factorize(n).factors) phi = phi / p * (p - 1);
    return phi;
}

MuPhiTheta mu_phi_theta1(u64 n) {
    auto f = factorize(n);
    MuPhiTheta r{1, n, Rational(1)};
    for (auto [p, e] : f.factors) {
        r.mu = e > 1 ? 0 : -r.mu;
        r.phi = r.phi / p * (p - 1);
        r.theta1 *= Rational((i64)p - 1, (i64)p);
    }
    return r;
}

double theta2(u64 n, double tol) {
    if (tol <= 0) throw std::domain_error("theta2: tol must be positive");
    double v = 6.0 / (M_PI * M_PI);
    for (auto [p, e] : factorize(n).factors) {
        double pp = (double)p;
        v *= (1.0 - 1.0 / pp) / (1.0 - 1.0 / (pp * pp));
    }
    return v;
}

i64 ramanujan_sum(i64 q, i64 m) {
    if (q < 1) throw std::domain_error("ramanujan_sum: q must be positive");
    i64 g = std::gcd(q, m < 0 ? -m : m);
    i64 s = 0;
    for (i64 d : divisors(g)) s += d * mobius((u64)(q / d));
    return s;
}

int kronecker(i64 a, i64 n) {
    static const int tab2[8] = {0, 1, 0, -1, 0, -1, 0, 1};
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    if ((a & 1) == 0 && (n & 1) == 0) return 0;
    int v = 0;
    while ((n & 1) == 0) {
        n >>= 1;
        ++v;
    }
    int k = (v & 1) ? tab2[a & 7] : 1;
    if (n < 0) {
        n = -n;
        if (a < 0) k = -k;
    }
    while (a != 0) {
        v = 0;
        while ((a & 1) == 0) {
            a >>= 1;
            ++v;
        }
        if (v & 1) k *= tab2[n & 7];
        if (a & n & 2) k = -k;
        i64 r = a < 0 ? -a : a;
        a = n % r;
        n = r;
    }
    return n == 1 ? k : 0;
}

i64 squarefree_part(i64 n) {
    if (n == 0) throw std::domain_error("squarefree_part of zero");
    i64 s = n < 0 ? -1 : 1;
    for (auto [p, e] : factorize((u64)(n < 0 ? -n : n)).factors) {
        if (e & 1) s *= (i64)p;
    }
    return s;
}

i64 fundamental_discriminant(i64 n) {
    if (is_square(n)) throw std::domain_error("fundamental_discriminant: square argument");
    i64 d = squarefree_part(n);
    return mod(d, 4) == 1 ? d : 4 * d;
}

bool is_fundamental_discriminant(i64 D) {
    if (D == 1) return true;
    if (mod(D, 4) == 1) return squarefree_part(D) == D;
    if (mod(D, 4) != 0) return false;
    i64 m = D / 4;
    i64 r = mod(m, 4);
    return (r == 2 || r == 3) && squarefree_part(m) == m;
}

i64 DirichletCharacter::modulus() const {
    return std::lcm(principal, D < 0 ? -D : D);
}

bool DirichletCharacter::is_principal() const {
    if (D == 1) return true;
    // (D/·) with D a nonzero square is principal away from the primes of D
    return D > 0 && is_square(D);
}

int DirichletCharacter::operator()(i64 n) const {
    if (std::gcd(n < 0 ? -n : n, principal) != 1) return 0;
    if (D == 1) return 1;
    return kronecker(D, n);
}

std::vector<DirichletCharacter> real_characters(i64 L) {
    std::vector<DirichletCharacter> out;
    for (i64 D = -L; D <= L; ++D) {
        if (D == 0) continue;
        if (L % (D < 0 ? -D : D) != 0) continue;
        if (!is_fundamental_discriminant(D)) continue;
        out.push_back({L, D});
    }
    std::sort(out.begin(), out.end(), [](auto& x, auto& y) {
        i64 ax = x.D < 0 ? -x.D : x.D, ay = y.D < 0 ? -y.D : y.D;
        return ax != ay ? ax < ay : x.D > y.D;
    });
    return out;
}

double dirichlet_L(const DirichletCharacter& chi, double s, double tol) {
    if (tol <= 0) throw std::domain_error("dirichlet_L: tol must be positive");
    if (tol < 1e-14) throw std::domain_error("dirichlet_L: tolerance below double precision");
    if (s < 1.0) throw std::domain_error("dirichlet_L: only s >= 1 is supported");
    const i64 m = chi.modulus();
    if (chi.is_principal()) {
        if (s == 1.0) throw std::domain_error("dirichlet_L: divergent at s=1 for principal character");
        double v = gsl_sf_zeta(s);
        for (auto p : factorize((u64)m).primes()) v *= 1.0 - std::pow((double)p, -s);
        return v;
    }
    if (s == 1.0) {
        double acc = 0;
        for (i64 a = 1; a <= m; ++a) {
            int c = chi(a);
            if (c) acc += c * gsl_sf_psi((double)a / (double)m);
        }
        return -acc / (double)m;
    }
    double acc = 0;
    for (i64 a = 1; a <= m; ++a) {
        int c = chi(a);
        if (c) acc += c * gsl_sf_hzeta(s, (double)a / (double)m);
    }
    return acc * std::pow((double)m, -s);
}

}  // namespace quadcone::arith
