#include "quadcone/expsums.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

namespace quadcone::expsums {

namespace {

using arith::mod;

// fills slice[((s1*N)+s2)*N+s3] for a fixed s0
using SliceGen = std::function<void(i64 s0, std::vector<i64>& slice)>;

constexpr double kMaxWork = 6e8;

void check_work(i64 N, size_t ncs, const char* what) {
    double n4 = std::pow((double)N, 4);
    double work = ncs > 1 ? n4 * std::min<double>((double)ncs, 30.0) : n4;
    if (work > kMaxWork)
        throw RangeError(std::string(what) + ": modulus " + std::to_string(N) + " exceeds the direct-summation budget");
}

std::vector<i64> ramanujan_table(i64 q) {
    std::vector<i64> t(q);
    for (i64 m = 0; m < q; ++m) t[m] = arith::ramanujan_sum(q, m);
    return t;
}

// dst[(e + shift) mod N] += src[e]
template <class T>
inline void add_rot(T* dst, const T* src, i64 N, i64 shift) {
    i64 split = N - shift;
    for (i64 e = 0; e < split; ++e) dst[e + shift] += src[e];
    for (i64 e = split; e < N; ++e) dst[e - split] += src[e];
}

template <class T>
inline bool all_zero(const T* v, i64 N) {
    for (i64 e = 0; e < N; ++e)
        if (v[e]) return false;
    return true;
}

// Every accumulator is a partial sum of slice values, so it is bounded by the
// running l1 mass; the narrow type gives up (empty result) once that could overflow.
// The slice is integer valued, so only c3 >= 0 is transformed and S(-c) = conj S(c).
template <class T>
std::vector<CycloInt> transform_core(i64 N, const SliceGen& gen, const CBox& box) {
    const i64 K = box.side(), R = box.R, H = R + 1;
    const i64 cap = std::numeric_limits<T>::max();
    std::vector<std::vector<i64>> ex(K, std::vector<i64>(N));
    for (i64 i = 0; i < K; ++i)
        for (i64 s = 0; s < N; ++s) ex[i][s] = mod((i - R) * s, N);

    std::vector<i64> slice((size_t)N * N * N);
    std::vector<T> V1((size_t)N * N * H * N), V2((size_t)N * K * H * N), V3((size_t)K * K * H * N);
    std::vector<T> out((size_t)K * K * K * H * N, 0);
    i64 mass = 0;
    for (i64 s0 = 0; s0 < N; ++s0) {
        gen(s0, slice);
        const i64 before = mass;
        for (i64 v : slice) mass += v < 0 ? -v : v;
        if (mass > cap) return {};
        if (mass == before) continue;
        std::fill(V1.begin(), V1.end(), 0);
        for (i64 s12 = 0; s12 < N * N; ++s12) {
            const i64* g = &slice[(size_t)s12 * N];
            for (i64 h3 = 0; h3 < H; ++h3) {
                T* v = &V1[((size_t)s12 * H + h3) * N];
                const i64* e3 = ex[R + h3].data();
                for (i64 s3 = 0; s3 < N; ++s3)
                    if (g[s3]) v[e3[s3]] += (T)g[s3];
            }
        }
        std::fill(V2.begin(), V2.end(), 0);
        for (i64 s1 = 0; s1 < N; ++s1)
            for (i64 s2 = 0; s2 < N; ++s2)
                for (i64 h3 = 0; h3 < H; ++h3) {
                    const T* src = &V1[(((size_t)s1 * N + s2) * H + h3) * N];
                    if (all_zero(src, N)) continue;
                    for (i64 i2 = 0; i2 < K; ++i2)
                        add_rot(&V2[(((size_t)s1 * K + i2) * H + h3) * N], src, N, ex[i2][s2]);
                }
        std::fill(V3.begin(), V3.end(), 0);
        for (i64 s1 = 0; s1 < N; ++s1)
            for (i64 i23 = 0; i23 < K * H; ++i23) {
                const T* src = &V2[((size_t)s1 * K * H + i23) * N];
                if (all_zero(src, N)) continue;
                for (i64 i1 = 0; i1 < K; ++i1) add_rot(&V3[((size_t)i1 * K * H + i23) * N], src, N, ex[i1][s1]);
            }
        for (i64 i123 = 0; i123 < K * K * H; ++i123) {
            const T* src = &V3[(size_t)i123 * N];
            if (all_zero(src, N)) continue;
            for (i64 i0 = 0; i0 < K; ++i0) add_rot(&out[((size_t)i0 * K * K * H + i123) * N], src, N, ex[i0][s0]);
        }
    }
    std::vector<CycloInt> res;
    res.reserve(box.size());
    for (size_t idx = 0; idx < box.size(); ++idx) {
        Vec4 c = box.at(idx);
        const bool flip = c[3] < 0;
        if (flip)
            for (auto& v : c) v = -v;
        size_t j = ((size_t)((c[0] + R) * K + c[1] + R) * K + (size_t)(c[2] + R)) * H + (size_t)c[3];
        CycloInt z(N);
        for (i64 e = 0; e < N; ++e) z.add_power(flip ? (N - e) % N : e, (i64)out[j * N + e]);
        res.push_back(std::move(z));
    }
    return res;
}

std::vector<CycloInt> transform_gen(i64 N, const SliceGen& gen, const CBox& box) {
    auto res = transform_core<std::int32_t>(N, gen, box);
    if (res.empty()) res = transform_core<i64>(N, gen, box);
    return res;
}

CycloInt transform_gen_one(i64 N, const SliceGen& gen, const Vec4& c) {
    std::vector<i64> slice((size_t)N * N * N);
    std::vector<i64> acc(N, 0);
    i64 c0 = mod(c[0], N), c1 = mod(c[1], N), c2 = mod(c[2], N), c3 = mod(c[3], N);
    for (i64 s0 = 0; s0 < N; ++s0) {
        gen(s0, slice);
        size_t idx = 0;
        for (i64 s1 = 0; s1 < N; ++s1)
            for (i64 s2 = 0; s2 < N; ++s2) {
                i64 e = (c0 * s0 + c1 * s1 + c2 * s2) % N;
                for (i64 s3 = 0; s3 < N; ++s3, ++idx) {
                    if (slice[idx]) acc[e] += slice[idx];
                    e += c3;
                    if (e >= N) e -= N;
                }
            }
    }
    CycloInt z(N);
    for (i64 e = 0; e < N; ++e) z.add_power(e, acc[e]);
    return z;
}

std::vector<CycloInt> run(i64 N, const SliceGen& gen, const std::vector<Vec4>& cs) {
    // a box covering all requested c when that is cheaper than separate passes
    int R = 0;
    for (auto& c : cs)
        for (auto v : c) R = std::max<int>(R, (int)std::abs(v));
    CBox box{R};
    std::vector<CycloInt> out;
    if (cs.size() <= 8 || (double)box.size() > 4.0 * cs.size() + 50) {
        for (auto& c : cs) out.push_back(transform_gen_one(N, gen, c));
        return out;
    }
    auto all = transform_gen(N, gen, box);
    for (auto& c : cs) out.push_back(all[box.index(c)]);
    return out;
}

std::vector<Vec4> box_vectors(const CBox& box) {
    std::vector<Vec4> cs(box.size());
    for (size_t i = 0; i < box.size(); ++i) cs[i] = box.at(i);
    return cs;
}

SliceGen gen_from_vector(i64 N, const std::vector<i64>& g) {
    return [N, &g](i64 s0, std::vector<i64>& slice) {
        std::copy(g.begin() + (size_t)s0 * N * N * N, g.begin() + (size_t)(s0 + 1) * N * N * N, slice.begin());
    };
}

// F(σ) over σ ∈ [0,N)^4 in slice order, for a fixed σ0
template <class Fn>
void for_slice(i64 N, i64 s0, std::vector<i64>& slice, Fn fn) {
    size_t idx = 0;
    Vec4 s{s0, 0, 0, 0};
    for (s[1] = 0; s[1] < N; ++s[1])
        for (s[2] = 0; s[2] < N; ++s[2])
            for (s[3] = 0; s[3] < N; ++s[3], ++idx) slice[idx] = fn(s);
}

// rq[(H/L + F(σ)) mod q] when L | H = F(λ)/L + ∇F(λ)·σ, else 0. With M = H + L·F(σ)
// this is tbl[M mod qL], and M mod qL is stepped along σ3 without division.
void full_slice(const QuadraticForm& F, const Vec4& gl, i64 FL, i64 L, i64 q, const std::vector<i64>& rq, i64 s0,
                std::vector<i64>& slice) {
    const i64 N = q * L;
    std::vector<i64> tbl(N, 0);
    for (i64 r = 0; r < N; r += L) tbl[r] = rq[r / L];
    const auto& G = F.gram;
    const i64 dd = mod(2 * L * G[3][3], N);
    size_t idx = 0;
    Vec4 s{s0, 0, 0, 0};
    for (s[1] = 0; s[1] < N; ++s[1])
        for (s[2] = 0; s[2] < N; ++s[2]) {
            s[3] = 0;
            i64 r = mod(FL + dot(gl, s) + L * F(s), N);
            // increment from σ3 to σ3+1 is gl3 + L(b + G33(2σ3+1))
            i64 d = mod(gl[3] + L * (2 * (G[0][3] * s[0] + G[1][3] * s[1] + G[2][3] * s[2]) + G[3][3]), N);
            for (i64 s3 = 0; s3 < N; ++s3, ++idx) {
                slice[idx] = tbl[r];
                r += d;
                if (r >= N) r -= N;
                d += dd;
                if (d >= N) d -= N;
            }
        }
}

i64 gradient_dot(const QuadraticForm& F, const Vec4& lambda, const Vec4& s) { return dot(F.grad(lambda), s); }

i64 Fl_over_L(const QuadraticForm& F, const CongruenceData& cong) {
    i64 v = F(cong.lambda);
    if (v % cong.L != 0) throw std::invalid_argument("congruence data: F(lambda) not divisible by L");
    return v / cong.L;
}

ExpSumValue phase_lift(const CycloInt& S, i64 q, const CongruenceData& cong, const Vec4& c) {
    // e_{qL²}(c·λ) S with S ∈ Z[ζ_{qL}]
    i64 M = q * cong.L * cong.L;
    return {S.lifted(M).rotated(dot(c, cong.lambda)), 1};
}

}  // namespace

size_t CBox::index(const Vec4& c) const {
    size_t K = side(), idx = 0;
    for (int i = 0; i < 4; ++i) idx = idx * K + (size_t)(c[i] + R);
    return idx;
}

Vec4 CBox::at(size_t idx) const {
    Vec4 c;
    size_t K = side();
    for (int i = 3; i >= 0; --i) {
        c[i] = (i64)(idx % K) - R;
        idx /= K;
    }
    return c;
}

bool CBox::contains(const Vec4& c) const {
    for (auto v : c)
        if (std::abs(v) > R) return false;
    return true;
}

std::vector<CycloInt> transform_box(i64 N, const std::vector<i64>& g, const CBox& box) {
    if ((i64)g.size() != N * N * N * N) throw std::invalid_argument("transform_box: size mismatch");
    return transform_gen(N, gen_from_vector(N, g), box);
}

CycloInt transform_one(i64 N, const std::vector<i64>& g, const Vec4& c) {
    if ((i64)g.size() != N * N * N * N) throw std::invalid_argument("transform_one: size mismatch");
    return transform_gen_one(N, gen_from_vector(N, g), c);
}

std::complex<double> ExpSumValue::numeric() const { return value.to_complex() / (double)denominator; }

std::optional<i64> ExpSumValue::integer() const {
    auto v = value.as_integer();
    if (!v || *v % denominator != 0) return std::nullopt;
    return *v / denominator;
}

bool ExpSumValue::operator==(const ExpSumValue& o) const {
    return value.scaled(o.denominator) == o.value.scaled(denominator);
}

void validate(const QuadraticForm& F, const CongruenceData& cong) {
    if (cong.L < 1) throw std::invalid_argument("congruence data: L must be positive");
    i64 g = cong.L;
    for (int i = 0; i < 4; ++i) {
        g = std::gcd(g, cong.lambda[i]);
        if (mod(cong.lambda[i] - cong.Gamma[i], cong.L) != 0)
            throw std::invalid_argument("congruence data: lambda is not a lift of Gamma");
    }
    if (g != 1) throw std::invalid_argument("congruence data: Gamma is not primitive mod L");
    if (F(cong.lambda) % cong.L != 0) throw std::invalid_argument("congruence data: F(Gamma) != 0 mod L");
}

CongruenceData make_congruence(const QuadraticForm& F, i64 L, const Vec4& Gamma) {
    if (L < 1) throw std::invalid_argument("congruence data: L must be positive");
    CongruenceData cd;
    cd.L = L;
    for (int i = 0; i < 4; ++i) cd.Gamma[i] = cd.lambda[i] = mod(Gamma[i], L);
    validate(F, cd);
    return cd;
}

CongruenceData twist(const QuadraticForm& F, const CongruenceData& cong, i64 d) {
    if (std::gcd(mod(d, cong.L), cong.L) != 1) throw std::invalid_argument("twist: d not a unit mod L");
    Vec4 G;
    for (int i = 0; i < 4; ++i) G[i] = d * cong.Gamma[i];
    return make_congruence(F, cong.L, G);
}

std::vector<Vec4> cone_classes(const QuadraticForm& F, i64 L) {
    std::vector<Vec4> out;
    Vec4 x;
    for (x[0] = 0; x[0] < L; ++x[0])
        for (x[1] = 0; x[1] < L; ++x[1])
            for (x[2] = 0; x[2] < L; ++x[2])
                for (x[3] = 0; x[3] < L; ++x[3]) {
                    i64 g = std::gcd(std::gcd(L, x[0]), std::gcd(std::gcd(x[1], x[2]), x[3]));
                    if (g != 1) continue;
                    if (F(x) % L != 0) continue;
                    out.push_back(x);
                }
    return out;
}

i64 H_value(const QuadraticForm& F, const CongruenceData& cong, const Vec4& y) {
    return Fl_over_L(F, cong) + gradient_dot(F, cong.lambda, y);
}

QDecomposition qdecomp(const QuadraticForm& F, const CongruenceData& cong, i64 q) {
    if (q < 1) throw std::invalid_argument("qdecomp: q must be positive");
    i64 bad = 2 * cong.L * std::abs(F.disc);
    i64 q1 = q, q2 = 1;
    for (auto p : arith::factorize((u64)q).primes()) {
        if (bad % (i64)p == 0) {
            while (q1 % (i64)p == 0) {
                q1 /= (i64)p;
                q2 *= (i64)p;
            }
        }
    }
    i64 m = q2 * cong.L;
    i64 FL = Fl_over_L(F, cong);
    i64 k2 = mod(mod(FL, m) * arith::invmod(q1, m) % m, m);
    i64 k1 = (FL - k2 * q1) / m;
    return {q, q1, q2, k1, k2};
}

ExpSumValue S_q_plain(const QuadraticForm& F, i64 q, const Vec4& c, const Limits& lim) {
    if (q < 1) throw std::invalid_argument("S_q_plain: q must be positive");
    if (q > lim.plain_q_max) throw RangeError("S_q_plain: q above the direct range");
    check_work(q, 1, "S_q_plain");
    auto rq = ramanujan_table(q);
    SliceGen gen = [&](i64 s0, std::vector<i64>& slice) {
        for_slice(q, s0, slice, [&](const Vec4& s) { return rq[mod(F(s), q)]; });
    };
    return {transform_gen_one(q, gen, c), 1};
}

std::vector<ExpSumValue> S_q_plain_box(const QuadraticForm& F, i64 q, const CBox& box, const Limits& lim) {
    if (q > lim.plain_q_max) throw RangeError("S_q_plain: q above the direct range");
    check_work(q, box.size(), "S_q_plain");
    auto rq = ramanujan_table(q);
    SliceGen gen = [&](i64 s0, std::vector<i64>& slice) {
        for_slice(q, s0, slice, [&](const Vec4& s) { return rq[mod(F(s), q)]; });
    };
    std::vector<ExpSumValue> out;
    for (auto& z : run(q, gen, box_vectors(box))) out.push_back({z, 1});
    return out;
}

i64 S_q_plain_multiplicative(const QuadraticForm& F, i64 q, const Vec4& c, const Limits& lim) {
    i128 prod = 1;
    for (auto [p, e] : arith::factorize((u64)q).factors) {
        i64 pe = arith::ipow((i64)p, e);
        auto v = S_q_plain(F, pe, c, lim).integer();
        if (!v) throw std::logic_error("S_q_plain: prime-power sum is not a rational integer");
        prod *= *v;
        if (prod > (i128)INT64_MAX || prod < -(i128)INT64_MAX) throw std::overflow_error("S_q_plain: product overflows");
    }
    return (i64)prod;
}

i64 R_sum(const QuadraticForm& F, i64 q, const Vec4& c) {
    if (std::gcd(q, 2 * F.disc) != 1) throw std::invalid_argument("R_sum: q must be coprime to 2*disc");
    i128 v = (i128)q * q * quadform::psi_F(F, q) * arith::ramanujan_sum(q, -F.adjoint_value(c));
    if (v > (i128)INT64_MAX || v < -(i128)INT64_MAX) throw std::overflow_error("R_sum overflow");
    return (i64)v;
}

std::vector<ExpSumValue> S1_direct_box_with(const QuadraticForm& F, const CongruenceData& cong,
                                            const QDecomposition& d, const CBox& box) {
    validate(F, cong);
    const i64 q1 = d.q1, m = d.q2 * cong.L;
    check_work(q1, box.size(), "S1");
    auto rq = ramanujan_table(q1);
    Vec4 gl = F.grad(cong.lambda);
    SliceGen gen = [&](i64 s0, std::vector<i64>& slice) {
        for_slice(q1, s0, slice, [&](const Vec4& s) { return rq[mod(m * m * F(s) + d.q2 * (dot(gl, s) + d.k1), q1)]; });
    };
    std::vector<ExpSumValue> out;
    for (auto& z : run(q1, gen, box_vectors(box))) out.push_back({z, 1});
    return out;
}

std::vector<ExpSumValue> S1_direct_box(const QuadraticForm& F, const CongruenceData& cong, i64 q, const CBox& box) {
    return S1_direct_box_with(F, cong, qdecomp(F, cong, q), box);
}

ExpSumValue S1_closed(const QuadraticForm& F, const CongruenceData& cong, i64 q, const Vec4& c) {
    auto d = qdecomp(F, cong, q);
    i64 inv = d.q1 == 1 ? 0 : arith::invmod(mod(d.q2 * cong.L * cong.L, d.q1), d.q1);
    CycloInt z = CycloInt::root(d.q1, -inv * mod(dot(c, cong.lambda), d.q1));
    return {z.scaled(R_sum(F, d.q1, c)), 1};
}

std::vector<ExpSumValue> S2_box_with(const QuadraticForm& F, const CongruenceData& cong, const QDecomposition& d,
                                     const CBox& box, const Limits& lim) {
    validate(F, cong);
    const i64 L = cong.L, N = d.q2 * L;
    if (N > lim.qL_max) throw RangeError("S2: q2*L above the direct range");
    check_work(N, box.size(), "S2");
    auto rq = ramanujan_table(d.q2);
    Vec4 gl = F.grad(cong.lambda);
    i64 FL = Fl_over_L(F, cong);
    SliceGen gen = [&](i64 s0, std::vector<i64>& slice) {
        for_slice(N, s0, slice, [&](const Vec4& s) -> i64 {
            i64 gs = dot(gl, s);
            if (mod(FL + d.q1 * gs, L) != 0) return 0;
            i64 m = d.q1 * d.q1 * L * F(s) + d.q1 * (gs + d.k2);
            return rq[mod(m / L, d.q2)];
        });
    };
    std::vector<ExpSumValue> out;
    for (auto& z : run(N, gen, box_vectors(box))) out.push_back({z, 1});
    return out;
}

std::vector<ExpSumValue> S2_box(const QuadraticForm& F, const CongruenceData& cong, i64 q, const CBox& box,
                                const Limits& lim) {
    return S2_box_with(F, cong, qdecomp(F, cong, q), box, lim);
}

std::vector<ExpSumValue> S_full_box(const QuadraticForm& F, const CongruenceData& cong, i64 q, const CBox& box,
                                    Mode mode, const Limits& lim) {
    validate(F, cong);
    std::vector<ExpSumValue> out;
    auto cs = box_vectors(box);
    if (mode == Mode::brute) {
        const i64 L = cong.L, N = q * L;
        if (N > lim.qL_max) throw RangeError("S_full: q*L above the brute range");
        check_work(N, box.size(), "S_full");
        auto rq = ramanujan_table(q);
        Vec4 gl = F.grad(cong.lambda);
        i64 FL = Fl_over_L(F, cong);
        SliceGen gen = [&](i64 s0, std::vector<i64>& slice) {
            full_slice(F, gl, FL, L, q, rq, s0, slice);
        };
        auto raw = run(N, gen, cs);
        for (size_t i = 0; i < cs.size(); ++i) out.push_back(phase_lift(raw[i], q, cong, cs[i]));
        return out;
    }
    auto d = qdecomp(F, cong, q);
    auto s2 = S2_box_with(F, cong, d, box, lim);
    for (size_t i = 0; i < cs.size(); ++i) {
        auto s1 = S1_closed(F, cong, q, cs[i]);
        CycloInt S = (s1.value * s2[i].value).lifted(q * cong.L);
        out.push_back(phase_lift(S, q, cong, cs[i]));
    }
    return out;
}

ExpSumValue S_full(const QuadraticForm& F, const CongruenceData& cong, i64 q, const Vec4& c, Mode mode,
                   const Limits& lim) {
    validate(F, cong);
    if (mode == Mode::brute) {
        const i64 L = cong.L, N = q * L;
        if (N > lim.qL_max) throw RangeError("S_full: q*L above the brute range");
        check_work(N, 1, "S_full");
        auto rq = ramanujan_table(q);
        Vec4 gl = F.grad(cong.lambda);
        i64 FL = Fl_over_L(F, cong);
        SliceGen gen = [&](i64 s0, std::vector<i64>& slice) {
            full_slice(F, gl, FL, L, q, rq, s0, slice);
        };
        return phase_lift(transform_gen_one(N, gen, c), q, cong, c);
    }
    auto d = qdecomp(F, cong, q);
    const i64 L = cong.L, N = d.q2 * L;
    if (N > lim.qL_max) throw RangeError("S2: q2*L above the direct range");
    auto rq = ramanujan_table(d.q2);
    Vec4 gl = F.grad(cong.lambda);
    i64 FL = Fl_over_L(F, cong);
    SliceGen gen = [&](i64 s0, std::vector<i64>& slice) {
        for_slice(N, s0, slice, [&](const Vec4& s) -> i64 {
            i64 gs = dot(gl, s);
            if (mod(FL + d.q1 * gs, L) != 0) return 0;
            i64 m = d.q1 * d.q1 * L * F(s) + d.q1 * (gs + d.k2);
            return rq[mod(m / L, d.q2)];
        });
    };
    CycloInt s2 = transform_gen_one(N, gen, c);
    auto s1 = S1_closed(F, cong, q, c);
    return phase_lift((s1.value * s2).lifted(q * L), q, cong, c);
}

namespace {

SliceGen script_gen(const QuadraticForm& F, const CongruenceData& cong, i64 q2, const Vec4& r,
                    const std::vector<i64>& rq) {
    const i64 L = cong.L, N = q2 * L, L2 = L * L;
    return [&F, r, &rq, L, N, L2, q2](i64 s0, std::vector<i64>& slice) {
        for_slice(N, s0, slice, [&](const Vec4& b) -> i64 {
            Vec4 a{r[0] + L * b[0], r[1] + L * b[1], r[2] + L * b[2], r[3] + L * b[3]};
            i64 v = F(a);
            if (mod(v, L2) != 0) return 0;
            return rq[mod(v / L2, q2)];
        });
    };
}

Vec4 script_offset(const CongruenceData& cong, i64 x) {
    Vec4 r{0, 0, 0, 0};
    if (cong.L == 1) return r;
    i64 xi = arith::invmod(x, cong.L);
    for (int i = 0; i < 4; ++i) r[i] = mod(xi * cong.lambda[i], cong.L);
    return r;
}

void check_script_range(i64 q2, i64 L, const Limits& lim, size_t ncs) {
    if (q2 < 1) throw std::invalid_argument("script_S: q2 must be positive");
    if (q2 * L * L > lim.q2L2_max) throw RangeError("script_S: q2*L^2 above the direct range");
    check_work(q2 * L, ncs, "script_S");
}

}  // namespace

ExpSumValue script_S(const QuadraticForm& F, const CongruenceData& cong, i64 q2, i64 x, const Vec4& c,
                     const Limits& lim) {
    validate(F, cong);
    check_script_range(q2, cong.L, lim, 1);
    Vec4 r = script_offset(cong, x);
    auto rq = ramanujan_table(q2);
    auto gen = script_gen(F, cong, q2, r, rq);
    CycloInt z = transform_gen_one(q2 * cong.L, gen, c);
    return {z.lifted(q2 * cong.L * cong.L).rotated(dot(c, r)), 1};
}

std::vector<ExpSumValue> script_S_box(const QuadraticForm& F, const CongruenceData& cong, i64 q2, i64 x,
                                      const CBox& box, const Limits& lim) {
    validate(F, cong);
    check_script_range(q2, cong.L, lim, box.size());
    Vec4 r = script_offset(cong, x);
    auto rq = ramanujan_table(q2);
    auto gen = script_gen(F, cong, q2, r, rq);
    auto cs = box_vectors(box);
    auto raw = run(q2 * cong.L, gen, cs);
    std::vector<ExpSumValue> out;
    for (size_t i = 0; i < cs.size(); ++i)
        out.push_back({raw[i].lifted(q2 * cong.L * cong.L).rotated(dot(cs[i], r)), 1});
    return out;
}

ExpSumValue A_char(const QuadraticForm& F, const CongruenceData& cong, i64 q2, const arith::DirichletCharacter& chi,
                   const Vec4& c, const Limits& lim) {
    const i64 L = cong.L;
    if (L % chi.modulus() != 0) throw std::invalid_argument("A_char: character modulus must divide L");
    CycloInt acc(q2 * L * L);
    for (i64 x = 1; x <= L; ++x) {
        if (std::gcd(x, L) != 1) continue;
        int v = chi(x);
        if (!v) continue;
        acc += script_S(F, cong, q2, x, c, lim).value.scaled(v);
    }
    return {acc, (i64)arith::euler_phi((u64)L)};
}

namespace {

std::vector<i64> smooth_numbers(const std::vector<u64>& primes, i64 bound) {
    std::vector<i64> out{1};
    for (auto p : primes) {
        size_t sz = out.size();
        for (size_t i = 0; i < sz; ++i) {
            i64 v = out[i];
            while (v <= bound / (i64)p) {
                v *= (i64)p;
                out.push_back(v);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

BCoeff B_impl(const QuadraticForm& F, const CongruenceData& cong, const Vec4& c, double tol, i64 u_cap,
              const Limits& lim) {
    validate(F, cong);
    BCoeff res;
    const i64 L = cong.L;
    if (L % F.conductor != 0) return res;
    i64 n = 2 * std::abs(F.disc) * L;
    auto primes = arith::factorize((u64)n).primes();
    arith::DirichletCharacter chi{L, F.fund_disc};
    i64 u_bound = std::min(u_cap, lim.q2L2_max / (L * L));
    auto us = smooth_numbers(primes, std::max<i64>(u_bound, 1));
    double total_recip = 1;
    for (auto p : primes) total_recip *= (double)p / ((double)p - 1);
    double recip = 0, C = 0;
    std::complex<double> acc = 0;
    bool met = false;
    for (i64 u : us) {
        auto A = A_char(F, cong, u, chi, c, lim).numeric();
        std::complex<double> t = A / std::pow((double)u, 4);
        res.u_values.push_back(u);
        res.terms.push_back(t);
        acc += t;
        recip += 1.0 / (double)u;
        res.last_u = u;
        C = 0;
        for (size_t i = 0; i < res.terms.size(); ++i)
            if ((double)res.u_values[i] * res.u_values[i] >= (double)u)
                C = std::max(C, std::abs(res.terms[i]) * (double)res.u_values[i]);
        res.tail_estimate = C * std::max(0.0, total_recip - recip);
        if (tol > 0 && res.tail_estimate < tol) {
            met = true;
            break;
        }
    }
    double th = arith::theta2((u64)n);
    res.value = th * acc;
    res.tail_estimate *= th;
    if (tol > 0 && !met)
        throw RangeError("B_coeff: tail estimate " + std::to_string(res.tail_estimate) +
                         " above tol within the direct-summation range (u <= " + std::to_string(res.last_u) + ")");
    return res;
}

}  // namespace

BCoeff B_coeff(const QuadraticForm& F, const CongruenceData& cong, const Vec4& c, double tol, const Limits& lim) {
    if (tol <= 0) throw std::invalid_argument("B_coeff: tol must be positive");
    return B_impl(F, cong, c, tol, INT64_MAX / 4, lim);
}

BCoeff B_coeff_truncated(const QuadraticForm& F, const CongruenceData& cong, const Vec4& c, i64 u_max,
                         const Limits& lim) {
    return B_impl(F, cong, c, -1, u_max, lim);
}

}  // namespace quadcone::expsums
