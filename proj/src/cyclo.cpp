#include "quadcone/cyclo.hpp"

#include <cmath>
#include <stdexcept>

namespace quadcone {

namespace {

using Poly = std::vector<i128>;

// p *= (x^d - 1)
void mul_xd_minus_1(Poly& p, i64 d) {
    Poly r(p.size() + d, 0);
    for (size_t i = 0; i < p.size(); ++i) {
        r[i + d] += p[i];
        r[i] -= p[i];
    }
    p.swap(r);
}

// p /= (x^d - 1), exact
void div_xd_minus_1(Poly& p, i64 d) {
    // p = q (x^d - 1): q_{i} = -p_i + q_{i-d}
    size_t n = p.size() - d;
    Poly q(n, 0);
    for (size_t i = 0; i < n; ++i) q[i] = -p[i] + (i >= (size_t)d ? q[i - d] : 0);
    p.swap(q);
}

i64 checked(i128 v) {
    if (v > (i128)INT64_MAX || v < (i128)INT64_MIN) throw std::overflow_error("cyclotomic coefficient overflow");
    return (i64)v;
}

}  // namespace

std::vector<i64> cyclotomic_polynomial(i64 N) {
    // Φ_N = ∏_{d|N} (x^d − 1)^{μ(N/d)}
    Poly p{1};
    auto ds = arith::divisors(N);
    for (i64 d : ds)
        if (arith::mobius((u64)(N / d)) == 1) mul_xd_minus_1(p, d);
    for (i64 d : ds)
        if (arith::mobius((u64)(N / d)) == -1) div_xd_minus_1(p, d);
    while (p.size() > 1 && p.back() == 0) p.pop_back();
    std::vector<i64> out(p.size());
    for (size_t i = 0; i < p.size(); ++i) out[i] = checked(p[i]);
    return out;
}

CycloInt::CycloInt(i64 N) : N_(N), c_(N, 0) {
    if (N < 1) throw std::invalid_argument("CycloInt: order must be positive");
}

CycloInt CycloInt::integer(i64 N, i64 v) {
    CycloInt z(N);
    z.c_[0] = v;
    return z;
}

CycloInt CycloInt::root(i64 N, i64 k) {
    CycloInt z(N);
    z.add_power(k, 1);
    return z;
}

void CycloInt::add_rotated(const CycloInt& o, i64 k, i64 m) {
    if (o.N_ != N_) throw std::invalid_argument("CycloInt: order mismatch");
    i64 s = arith::mod(k, N_);
    for (i64 j = 0; j < N_; ++j) {
        i64 t = j + s;
        if (t >= N_) t -= N_;
        c_[t] += m * o.c_[j];
    }
}

CycloInt& CycloInt::operator+=(const CycloInt& o) {
    if (o.N_ == N_) {
        for (i64 j = 0; j < N_; ++j) c_[j] += o.c_[j];
        return *this;
    }
    i64 M = std::lcm(N_, o.N_);
    *this = lifted(M) + o.lifted(M);
    return *this;
}

CycloInt& CycloInt::operator-=(const CycloInt& o) { return *this += o.scaled(-1); }

CycloInt CycloInt::operator+(const CycloInt& o) const {
    CycloInt r = *this;
    r += o;
    return r;
}

CycloInt CycloInt::operator-(const CycloInt& o) const {
    CycloInt r = *this;
    r -= o;
    return r;
}

CycloInt CycloInt::operator*(const CycloInt& o) const {
    i64 M = std::lcm(N_, o.N_);
    CycloInt a = lifted(M), b = o.lifted(M);
    CycloInt r(M);
    for (i64 i = 0; i < M; ++i) {
        if (!a.c_[i]) continue;
        for (i64 j = 0; j < M; ++j) {
            if (!b.c_[j]) continue;
            i64 t = i + j;
            if (t >= M) t -= M;
            r.c_[t] += a.c_[i] * b.c_[j];
        }
    }
    return r;
}

CycloInt CycloInt::scaled(i64 m) const {
    CycloInt r = *this;
    for (auto& v : r.c_) v *= m;
    return r;
}

CycloInt CycloInt::rotated(i64 k) const {
    CycloInt r(N_);
    r.add_rotated(*this, k);
    return r;
}

CycloInt CycloInt::lifted(i64 M) const {
    if (M % N_ != 0) throw std::invalid_argument("CycloInt: lift target not a multiple");
    if (M == N_) return *this;
    CycloInt r(M);
    i64 f = M / N_;
    for (i64 j = 0; j < N_; ++j) r.c_[j * f] = c_[j];
    return r;
}

CycloInt CycloInt::galois(i64 t) const {
    if (std::gcd(arith::mod(t, N_), N_) != 1) throw std::invalid_argument("CycloInt: Galois exponent not a unit");
    CycloInt r(N_);
    for (i64 j = 0; j < N_; ++j) r.c_[arith::mod((i128)j * t % N_, N_)] += c_[j];
    return r;
}

std::vector<i64> CycloInt::reduced() const {
    auto phi = cyclotomic_polynomial(N_);
    const size_t deg = phi.size() - 1;
    std::vector<i128> r(c_.begin(), c_.end());
    for (size_t i = r.size(); i-- > deg;) {
        i128 lead = r[i];
        if (!lead) continue;
        // Φ_N is monic
        for (size_t j = 0; j <= deg; ++j) r[i - deg + j] -= lead * phi[j];
    }
    std::vector<i64> out(deg);
    for (size_t i = 0; i < deg; ++i) out[i] = checked(r[i]);
    return out;
}

bool CycloInt::is_zero() const {
    for (auto v : reduced())
        if (v) return false;
    return true;
}

std::optional<i64> CycloInt::as_integer() const {
    auto r = reduced();
    for (size_t i = 1; i < r.size(); ++i)
        if (r[i]) return std::nullopt;
    return r.empty() ? 0 : r[0];
}

std::complex<double> CycloInt::to_complex() const {
    long double re = 0, im = 0;
    for (i64 j = 0; j < N_; ++j) {
        if (!c_[j]) continue;
        long double ang = 2.0L * M_PIl * (long double)j / (long double)N_;
        re += (long double)c_[j] * std::cos(ang);
        im += (long double)c_[j] * std::sin(ang);
    }
    return {(double)re, (double)im};
}

bool CycloInt::operator==(const CycloInt& o) const {
    i64 M = std::lcm(N_, o.N_);
    return (lifted(M) - o.lifted(M)).is_zero();
}

}  // namespace quadcone
