#pragma once

// Complete quadratic exponential sums attached to F and a congruence class,
// evaluated exactly in Z[ζ_N].

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadcone/cyclo.hpp"
#include "quadcone/quadform.hpp"

namespace quadcone::expsums {

using quadform::QuadraticForm;

class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct Limits {
    i64 qL_max = 48;      // brute S_{q,L,λ}: modulus qL
    i64 q2L2_max = 256;   // 𝒮_{q₂,L,λ}: modulus q₂L²
    i64 plain_q_max = 120;
};

/// (L, Γ) with a lift λ; F(λ) ≡ 0 mod L and gcd(L, λ) = 1.
struct CongruenceData {
    i64 L = 1;
    Vec4 Gamma{0, 0, 0, 0};
    Vec4 lambda{0, 0, 0, 0};
};

/// Γ reduced into [0, L) serves as the lift.
CongruenceData make_congruence(const QuadraticForm& F, i64 L, const Vec4& Gamma);
void validate(const QuadraticForm& F, const CongruenceData& cong);
/// The class of dΓ (gcd(d, L) = 1).
CongruenceData twist(const QuadraticForm& F, const CongruenceData& cong, i64 d);
/// All Γ mod L with F(Γ) ≡ 0 mod L and gcd(Γ, L) = 1, in lexicographic order.
std::vector<Vec4> cone_classes(const QuadraticForm& F, i64 L);

/// H(y) = F(λ)/L + ∇F(λ)·y
i64 H_value(const QuadraticForm& F, const CongruenceData& cong, const Vec4& y);

struct QDecomposition {
    i64 q, q1, q2, k1, k2;
};
QDecomposition qdecomp(const QuadraticForm& F, const CongruenceData& cong, i64 q);

/// numerator / denominator with numerator in Z[ζ_N]
struct ExpSumValue {
    CycloInt value;
    i64 denominator = 1;

    std::complex<double> numeric() const;
    /// the rational integer value, if it is one
    std::optional<i64> integer() const;
    bool operator==(const ExpSumValue& o) const;
    bool operator!=(const ExpSumValue& o) const { return !(*this == o); }
};

/// Box of Poisson vectors c with |c|∞ ≤ R; index(c) is lexicographic.
struct CBox {
    int R = 0;
    int side() const { return 2 * R + 1; }
    size_t size() const { return (size_t)side() * side() * side() * side(); }
    size_t index(const Vec4& c) const;
    Vec4 at(size_t idx) const;
    bool contains(const Vec4& c) const;
};

/// Σ_{σ mod N} g(σ) ζ_N^{c·σ} for every c in the box (row-column transform, exact).
std::vector<CycloInt> transform_box(i64 N, const std::vector<i64>& g, const CBox& box);
/// Same for a single c.
CycloInt transform_one(i64 N, const std::vector<i64>& g, const Vec4& c);

enum class Mode { brute, crt };

/// S_q(c) = Σ_b Σ_a e_q(aF(b) + c·b)
ExpSumValue S_q_plain(const QuadraticForm& F, i64 q, const Vec4& c, const Limits& lim = {});
std::vector<ExpSumValue> S_q_plain_box(const QuadraticForm& F, i64 q, const CBox& box, const Limits& lim = {});
/// via multiplicativity over prime powers; each factor evaluated directly
i64 S_q_plain_multiplicative(const QuadraticForm& F, i64 q, const Vec4& c, const Limits& lim = {});

/// ℛ(q;c) = q²ψ_F(q) c_q(−F*(c)), gcd(q, 2Δ) = 1
i64 R_sum(const QuadraticForm& F, i64 q, const Vec4& c);

/// Phased sum e_{qL²}(c·λ)·S_{q,L,λ}(c).
ExpSumValue S_full(const QuadraticForm& F, const CongruenceData& cong, i64 q, const Vec4& c, Mode mode,
                   const Limits& lim = {});
std::vector<ExpSumValue> S_full_box(const QuadraticForm& F, const CongruenceData& cong, i64 q, const CBox& box,
                                    Mode mode, const Limits& lim = {});

/// S⁽¹⁾ by direct summation over (Z/q₁)⁴ and by its closed form.
std::vector<ExpSumValue> S1_direct_box(const QuadraticForm& F, const CongruenceData& cong, i64 q, const CBox& box);
ExpSumValue S1_closed(const QuadraticForm& F, const CongruenceData& cong, i64 q, const Vec4& c);
/// S⁽²⁾ by direct summation over (Z/q₂L)⁴.
std::vector<ExpSumValue> S2_box(const QuadraticForm& F, const CongruenceData& cong, i64 q, const CBox& box,
                                const Limits& lim = {});
/// The same sums with the Bézout pair (k₁, k₂) supplied by the caller.
std::vector<ExpSumValue> S2_box_with(const QuadraticForm& F, const CongruenceData& cong, const QDecomposition& d,
                                     const CBox& box, const Limits& lim = {});
std::vector<ExpSumValue> S1_direct_box_with(const QuadraticForm& F, const CongruenceData& cong,
                                            const QDecomposition& d, const CBox& box);

/// 𝒮_{q₂,L,λ}(x;c)
ExpSumValue script_S(const QuadraticForm& F, const CongruenceData& cong, i64 q2, i64 x, const Vec4& c,
                     const Limits& lim = {});
std::vector<ExpSumValue> script_S_box(const QuadraticForm& F, const CongruenceData& cong, i64 q2, i64 x,
                                      const CBox& box, const Limits& lim = {});

/// 𝒜_{q₂,L,λ}(χ;c) = (1/φ(L)) Σ_x χ(x) 𝒮(x;c), χ real mod L
ExpSumValue A_char(const QuadraticForm& F, const CongruenceData& cong, i64 q2, const arith::DirichletCharacter& chi,
                   const Vec4& c, const Limits& lim = {});

struct BCoeff {
    std::complex<double> value{0, 0};
    double tail_estimate = 0;
    i64 last_u = 0;                 // largest u included
    std::vector<i64> u_values;
    std::vector<std::complex<double>> terms;  // 𝒜_u/u⁴ (before the θ₂ factor)
};

/// ℬ_{L,λ}(c), the u-sum truncated once the tail estimate drops below tol.
BCoeff B_coeff(const QuadraticForm& F, const CongruenceData& cong, const Vec4& c, double tol, const Limits& lim = {});
/// ℬ with the u-sum cut at u ≤ u_max.
BCoeff B_coeff_truncated(const QuadraticForm& F, const CongruenceData& cong, const Vec4& c, i64 u_max,
                         const Limits& lim = {});

}  // namespace quadcone::expsums
