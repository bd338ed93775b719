#include "quadcone/brauer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace quadcone::brauer {

namespace {

using arith::mod;

int eps2(i64 u) { return (int)(mod(u, 4) == 3); }
int omega2(i64 u) {
    i64 r = mod(u, 8);
    return (int)(r == 3 || r == 5);
}

int legendre(i64 u, i64 p) { return arith::kronecker(mod(u, p), p); }

int val128(i128 x, i64 p, int cap) {
    if (x == 0) return cap;
    int v = 0;
    while (v < cap && x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

i128 F128(const QuadraticForm& F, const Vec4& x) { return F.eval128(x); }

i128 grad_i(const QuadraticForm& F, const Vec4& x, int i) {
    i128 s = 0;
    for (int j = 0; j < 4; ++j) s += (i128)F.gram[i][j] * x[j];
    return 2 * s;
}

i128 dot128(const Vec4& a, const Vec4& b) {
    i128 s = 0;
    for (int i = 0; i < 4; ++i) s += (i128)a[i] * b[i];
    return s;
}

}  // namespace

int hilbert_symbol(i64 a, i64 b, Place v) {
    if (a == 0 || b == 0) throw std::invalid_argument("hilbert_symbol: arguments must be nonzero");
    if (v.is_infinite()) return (a < 0 && b < 0) ? -1 : 1;
    const i64 p = (i64)v.p;
    int al = arith::valuation(a, p), be = arith::valuation(b, p);
    i64 u = a, w = b;
    for (int i = 0; i < al; ++i) u /= p;
    for (int i = 0; i < be; ++i) w /= p;
    if (p == 2) {
        int e = eps2(u) * eps2(w) + al * omega2(w) + be * omega2(u);
        return e % 2 ? -1 : 1;
    }
    int sign = ((i64)al * be % 2 == 1 && (p - 1) / 2 % 2 == 1) ? -1 : 1;
    int lu = be % 2 ? legendre(u, p) : 1;
    int lw = al % 2 ? legendre(w, p) : 1;
    return sign * lu * lw;
}

Rational invariant_of_symbol(int s) { return s == 1 ? Rational(0) : Rational(1, 2); }

Rational invariant_at_p(const QuadraticForm& F, const Vec4& g, u64 pu, const CongruenceData& cong,
                        const LocalOptions& opt) {
    expsums::validate(F, cong);
    if (!arith::is_prime(pu)) throw std::invalid_argument("invariant_at_p: p must be prime");
    const i64 p = (i64)pu;
    const int e = arith::valuation(cong.L, p);
    const int delta = p == 2 ? 3 : 1;
    std::mt19937_64 rng(opt.seed * 1000003 + pu);

    // level k1: all residues mod p^{k1} in the class that are primitive zeros
    const int k1 = std::max(e, 1);
    const i64 pk1 = arith::ipow(p, k1), pe = arith::ipow(p, e), n = pk1 / pe;
    std::vector<Vec4> level;
    Vec4 t;
    for (t[0] = 0; t[0] < n; ++t[0])
        for (t[1] = 0; t[1] < n; ++t[1])
            for (t[2] = 0; t[2] < n; ++t[2])
                for (t[3] = 0; t[3] < n; ++t[3]) {
                    Vec4 v;
                    bool prim = false;
                    for (int i = 0; i < 4; ++i) {
                        v[i] = mod(cong.lambda[i], pe) + pe * t[i];
                        if (v[i] % p) prim = true;
                    }
                    if (prim && F128(F, v) % pk1 == 0) level.push_back(v);
                }
    if (level.empty()) throw InsolubleError("invariant_at_p: no primitive local points in the class");

    std::vector<int> found;
    i64 pk = pk1;
    for (int k = k1; k <= opt.max_level && (int)found.size() < opt.samples; ++k) {
        std::vector<Vec4> open;
        for (auto& v : level) {
            int tv = k;
            for (int i = 0; i < 4; ++i) tv = std::min(tv, val128(grad_i(F, v, i), p, k));
            if (k >= 2 * tv + 1) {
                // a Z_p point x ≡ v mod p^{k−tv} exists; g(x) is known mod p^{k−tv}
                i128 gv = dot128(g, v);
                int sg = val128(gv, p, k);
                if (sg + delta <= k - tv) {
                    i128 u = gv;
                    for (int i = 0; i < sg; ++i) u /= p;
                    i64 urep = (i64)(((u % arith::ipow(p, delta)) + arith::ipow(p, delta)) % arith::ipow(p, delta));
                    i64 gval = arith::ipow(p, sg % 2) * urep;
                    found.push_back(hilbert_symbol(F.disc, gval, Place::prime(pu)));
                    continue;
                }
            }
            open.push_back(v);
        }
        if (open.empty() || (int)found.size() >= opt.samples) break;
        if ((double)pk * p > 1e12) break;
        std::vector<Vec4> next;
        const i64 pk_next = pk * p;
        for (auto& v : open) {
            Vec4 w;
            for (w[0] = 0; w[0] < p; ++w[0])
                for (w[1] = 0; w[1] < p; ++w[1])
                    for (w[2] = 0; w[2] < p; ++w[2])
                        for (w[3] = 0; w[3] < p; ++w[3]) {
                            Vec4 x{v[0] + pk * w[0], v[1] + pk * w[1], v[2] + pk * w[2], v[3] + pk * w[3]};
                            if (F128(F, x) % pk_next == 0) next.push_back(x);
                        }
        }
        if (next.empty() && found.empty())
            throw InsolubleError("invariant_at_p: the class has no primitive points over Z_" + std::to_string(pu));
        std::shuffle(next.begin(), next.end(), rng);
        if ((int)next.size() > opt.width) next.resize(opt.width);
        level.swap(next);
        pk = pk_next;
    }
    if (found.empty())
        throw PrecisionError("invariant_at_p: no certified lift at p = " + std::to_string(pu) +
                             " within the working precision");
    for (int s : found)
        if (s != found.front())
            throw NotLocallyConstantError("invariant_at_p: invariant varies on the class at p = " + std::to_string(pu) +
                                          "; refine L");
    return invariant_of_symbol(found.front());
}

Rational invariant_at_infinity(const QuadraticForm& F, const Vec4& g, int component, u64 seed) {
    if (F.disc > 0 || F.components.count == 1) {
        if (component != 0) throw std::invalid_argument("invariant_at_infinity: single real component");
        return Rational(0);
    }
    if (component < 0 || component > 1) throw std::invalid_argument("invariant_at_infinity: bad component index");
    const auto s = F.components.separator;
    double ss = 0;
    for (double v : s) ss += v * v;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    int sign = 0;
    for (int it = 0; it < 64; ++it) {
        Vec4d y;
        for (auto& v : y) v = nd(rng);
        double ys = 0;
        for (int i = 0; i < 4; ++i) ys += y[i] * s[i];
        for (int i = 0; i < 4; ++i) y[i] -= ys / ss * s[i];
        double Fy = F.eval(y), Fs = F.eval(s);
        if (Fy * Fs >= 0) continue;
        double tt = std::sqrt(-Fy / Fs);
        for (double sg : {1.0, -1.0}) {
            Vec4d x;
            for (int i = 0; i < 4; ++i) x[i] = y[i] + sg * tt * s[i];
            if (F.component_of(x) != component) continue;
            double gx = 0;
            for (int i = 0; i < 4; ++i) gx += (double)g[i] * x[i];
            if (std::abs(gx) < 1e-9) continue;
            int sgn = gx > 0 ? 1 : -1;
            if (sign == 0) sign = sgn;
            else if (sign != sgn) throw std::logic_error("invariant_at_infinity: g changes sign on a component");
        }
    }
    if (sign == 0) throw std::logic_error("invariant_at_infinity: no sample on the component");
    return invariant_of_symbol(hilbert_symbol(F.disc, sign, Place::infinity()));
}

std::vector<u64> relevant_primes(const QuadraticForm& F, const Vec4& g, i64 L) {
    i64 content = 0;
    for (auto v : g) content = std::gcd(content, v);
    if (content == 0) throw std::invalid_argument("relevant_primes: g is zero");
    return arith::factorize((u64)(2 * std::abs(F.disc) * L * content)).primes();
}

Rational rho_f_eval(const QuadraticForm& F, const Vec4& g, const CongruenceData& cong, const LocalOptions& opt) {
    auto bad = relevant_primes(F, g, cong.L);
    Rational r(0);
    for (u64 p : bad) r += invariant_at_p(F, g, p, cong, opt);
    int checked = 0;
    for (i64 p : arith::primes_up_to(200)) {
        if (checked == 5) break;
        if (std::find(bad.begin(), bad.end(), (u64)p) != bad.end()) continue;
        LocalOptions o = opt;
        o.samples = 4;
        if (invariant_at_p(F, g, (u64)p, cong, o) != Rational(0))
            throw std::logic_error("rho_f_eval: nonzero invariant at a good prime " + std::to_string(p));
        ++checked;
    }
    r = Rational(r.numerator() % r.denominator(), r.denominator());
    return r;
}

BrauerEvaluation evaluate(const QuadraticForm& F, const Vec4& g, const CongruenceData& cong, const LocalOptions& opt) {
    BrauerEvaluation ev;
    for (u64 p : relevant_primes(F, g, cong.L)) ev.per_prime[p] = invariant_at_p(F, g, p, cong, opt);
    ev.rho_f = rho_f_eval(F, g, cong, opt);
    ev.components = (F.disc < 0) ? 2 : 1;
    for (int c = 0; c < ev.components; ++c) {
        ev.component_inv[c] = invariant_at_infinity(F, g, c);
        Rational tot = ev.rho_f + ev.component_inv[c];
        ev.xi[c] = (tot.denominator() == 1) ? 2 : 0;
    }
    return ev;
}

int xi_density(const QuadraticForm& F, const Vec4& g, const CongruenceData& cong, int component,
               const LocalOptions& opt) {
    auto ev = evaluate(F, g, cong, opt);
    if (component < 0 || component >= ev.components) throw std::invalid_argument("xi_density: bad component index");
    return ev.xi[component];
}

bool obstructed_by_character(const QuadraticForm& F, const Vec4& g, const CongruenceData& base, int component,
                             i64 gamma) {
    if (base.L % F.conductor != 0) throw std::invalid_argument("obstructed_by_character: conductor must divide L");
    if (std::gcd(mod(gamma, base.L), base.L) != 1) throw std::invalid_argument("obstructed_by_character: gamma not a unit");
    if (xi_density(F, g, base, component) != 2)
        throw std::invalid_argument("obstructed_by_character: base pair does not meet the Brauer-Manin set");
    return quadform::psi_F(F, gamma) == -1;
}

}  // namespace quadcone::brauer
