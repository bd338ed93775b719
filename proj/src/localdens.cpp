#include "quadcone/localdens.hpp"

#include <cmath>

#include "quadcone/brauer.hpp"

namespace quadcone::localdens {

namespace {

using arith::mod;

constexpr double kMaxCountWork = 4e8;

double to_double(const Rational& r) { return (double)r.numerator() / (double)r.denominator(); }

int ord_L(u64 p, const std::optional<CongruenceData>& cong) {
    return cong ? arith::valuation(cong->L, (i64)p) : 0;
}

}  // namespace

i64 primitive_count(const QuadraticForm& F, u64 p, const std::optional<CongruenceData>& cong, int k) {
    const int e = ord_L(p, cong);
    if (k < std::max(e, 1)) throw std::invalid_argument("primitive_count: k below ord_p(L)");
    const i64 q = arith::ipow((i64)p, k), pe = arith::ipow((i64)p, e), n = q / pe;
    if ((double)n * n * n + (double)q * q > kMaxCountWork)
        throw NotStabilizedError("primitive_count: p^k = " + std::to_string(q) + " beyond the counting budget");
    Vec4 G{0, 0, 0, 0};
    if (cong)
        for (int i = 0; i < 4; ++i) G[i] = mod(cong->lambda[i], pe);
    const auto& A = F.gram;

    // T[b*q + c] = #{v3 : a33 v3² + b v3 + c ≡ 0}, split by whether p | v3
    std::vector<std::int32_t> T_all((size_t)q * q, 0), T_unit((size_t)q * q, 0);
    const i64 a33 = mod(A[3][3], q);
    for (i64 t = 0; t < n; ++t) {
        i64 v3 = G[3] + pe * t;
        bool unit = v3 % (i64)p != 0;
        i64 sq = (i64)((i128)a33 * v3 % q * v3 % q);
        for (i64 b = 0; b < q; ++b) {
            i64 c = mod(-(sq + (i64)((i128)b * v3 % q)), q);
            ++T_all[(size_t)b * q + c];
            if (unit) ++T_unit[(size_t)b * q + c];
        }
    }
    i64 total = 0;
    for (i64 t0 = 0; t0 < n; ++t0) {
        i64 v0 = G[0] + pe * t0;
        for (i64 t1 = 0; t1 < n; ++t1) {
            i64 v1 = G[1] + pe * t1;
            for (i64 t2 = 0; t2 < n; ++t2) {
                i64 v2 = G[2] + pe * t2;
                i128 b = 2 * ((i128)A[0][3] * v0 + (i128)A[1][3] * v1 + (i128)A[2][3] * v2);
                i128 c = (i128)A[0][0] * v0 * v0 + (i128)A[1][1] * v1 * v1 + (i128)A[2][2] * v2 * v2 +
                         2 * ((i128)A[0][1] * v0 * v1 + (i128)A[0][2] * v0 * v2 + (i128)A[1][2] * v1 * v2);
                i64 bm = (i64)(b % q), cm = (i64)(c % q);
                if (bm < 0) bm += q;
                if (cm < 0) cm += q;
                bool all_div = v0 % (i64)p == 0 && v1 % (i64)p == 0 && v2 % (i64)p == 0;
                total += all_div ? T_unit[(size_t)bm * q + cm] : T_all[(size_t)bm * q + cm];
            }
        }
    }
    return total;
}

Rational sigma_p_good(const QuadraticForm& F, u64 p) {
    i64 P = (i64)p, psi = quadform::psi_F(F, P);
    return Rational(P * P + (1 + psi) * P + 1, P * (P + 1));
}

std::vector<u64> bad_primes(const QuadraticForm& F, i64 L) {
    return arith::factorize((u64)(2 * std::abs(F.disc) * L)).primes();
}

LocalDensity sigma_p(const QuadraticForm& F, u64 p, const std::optional<CongruenceData>& cong, int max_k,
                     bool force_count) {
    if (!arith::is_prime(p)) throw std::invalid_argument("sigma_p: p must be prime");
    if (cong) expsums::validate(F, *cong);
    const int e = ord_L(p, cong);
    const int s = arith::valuation(2 * F.disc, (i64)p);
    const bool good = s == 0 && e == 0;
    LocalDensity out;
    out.p = p;
    if (good && !force_count) {
        out.value = sigma_p_good(F, p);
        out.stabilized_at = 1;
        out.method = LocalDensity::Method::closed_form;
        return out;
    }
    if (max_k < e + 2) throw std::invalid_argument("sigma_p: max_k must be at least ord_p(L) + 2");
    int k0 = good ? 1 : std::max(e + 2, 2 * s + 1);
    out.method = LocalDensity::Method::raw_count;
    auto density = [&](int k) {
        i64 pk3 = arith::ipow((i64)p, 3 * k);
        return Rational(primitive_count(F, p, cong, k), pk3);
    };
    Rational prev = density(k0);
    for (int k = k0; k < max_k; ++k) {
        Rational next = density(k + 1);
        if (next == prev) {
            out.stabilized_at = k;
            // imprimitive vectors contribute the geometric factor when there is no congruence at p
            out.value = e == 0 ? prev * Rational((i64)(p * p), (i64)(p * p - 1)) : prev;
            return out;
        }
        prev = next;
    }
    throw NotStabilizedError("sigma_p: no agreement between consecutive levels up to k = " + std::to_string(max_k) +
                             " at p = " + std::to_string(p));
}

SeriesValue singular_series_W(const QuadraticForm& F, const CongruenceData& cong, double tol, i64 p_max) {
    if (tol <= 0) throw std::invalid_argument("singular_series_W: tol must be positive");
    expsums::validate(F, cong);
    SeriesValue sv;
    const double L1 = arith::dirichlet_L(quadform::psi_character(F), 1.0);
    double bad = 1;
    for (u64 p : bad_primes(F, cong.L)) {
        auto sp = sigma_p(F, p, cong);
        Rational f = (Rational(1) - Rational(quadform::psi_F(F, (i64)p), (i64)p)) * sp.value;
        sv.bad_factors[p] = f;
        bad *= to_double(f);
    }
    double good = 1;
    const i64 bad_n = 2 * std::abs(F.disc) * cong.L;
    for (i64 p : arith::primes_up_to(p_max)) {
        if (bad_n % p == 0) continue;
        Rational f = (Rational(1) - Rational(quadform::psi_F(F, p), p)) * sigma_p_good(F, (u64)p);
        good *= to_double(f);
    }
    sv.partial = L1 * bad * good;
    sv.truncation_prime = p_max;
    sv.tail_bound = std::expm1(1.0 / (double)p_max);
    arith::DirichletCharacter psi_chi0{cong.L, 4 * F.disc};
    sv.value = L1 * bad / arith::dirichlet_L(psi_chi0, 2.0);
    return sv;
}

DensityReport measures(const QuadraticForm& F, const CongruenceData& cong, double tol, i64 p_max) {
    auto sv = singular_series_W(F, cong, tol, p_max);
    for (auto& [p, f] : sv.bad_factors)
        if (f == Rational(0))
            throw InsolubleError("measures: the class has no primitive local points at p = " + std::to_string(p));
    DensityReport r;
    double L2chi0 = arith::dirichlet_L(arith::DirichletCharacter::trivial_mod(cong.L), 2.0);
    r.series_W = sv.value;
    r.omega_f = sv.value / L2chi0;
    r.tamagawa_V = (double)arith::euler_phi((u64)cong.L) * r.omega_f;
    r.truncation_prime = sv.truncation_prime;
    r.tail_bound = sv.tail_bound;
    r.l_values["L(1,psi_F)"] = arith::dirichlet_L(quadform::psi_character(F), 1.0);
    r.l_values["L(2,chi0[L])"] = L2chi0;
    r.l_values["L(2,psi_F chi0[L])"] = arith::dirichlet_L({cong.L, 4 * F.disc}, 2.0);
    double w = r.tamagawa_V * (double)cong.L * (double)cong.L;
    r.window_flag = w < 1e-3 || w > 1e3;
    return r;
}

bool locally_soluble(const QuadraticForm& F, const CongruenceData& cong) {
    for (u64 p : bad_primes(F, cong.L))
        if (sigma_p(F, p, cong).value == Rational(0)) return false;
    return true;
}

double omega_f_union(const QuadraticForm& F, i64 L, const std::vector<Vec4>& classes, double tol) {
    double s = 0;
    for (auto& g : classes) {
        auto cd = expsums::make_congruence(F, L, g);
        if (locally_soluble(F, cd)) s += measures(F, cd, tol).omega_f;
    }
    return s;
}

double artin_local_factor(const QuadraticForm& F, u64 p, double s) {
    if (std::gcd((i64)p, 2 * F.disc) != 1) throw std::invalid_argument("artin_local_factor: p divides 2*disc");
    if (s <= 0.5) throw std::invalid_argument("artin_local_factor: s must exceed 1/2");
    double x = std::pow((double)p, -s);
    return 1.0 / ((1.0 - quadform::psi_F(F, (i64)p) * x) * (1.0 - x));
}

double K_closed(const QuadraticForm& F, const CongruenceData& cong, int component, double I, double tol) {
    if (I < 0) throw std::invalid_argument("K_closed: I must be nonnegative");
    if (cong.L % F.conductor != 0) return 0.0;
    auto pt = quadform::find_point_and_tangent(F, 50);
    int xi = brauer::xi_density(F, pt.g, cong, component);
    double om = measures(F, cong, tol).omega_f;
    double L2 = arith::dirichlet_L({cong.L, 4 * F.disc}, 2.0);
    return (xi == 2 ? 1.0 : -1.0) * I * om * L2;
}

}  // namespace quadcone::localdens
