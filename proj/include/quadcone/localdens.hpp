#pragma once

// p-adic densities of the cone under a congruence condition, the modified
// singular series and the measures built from it.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "quadcone/expsums.hpp"

namespace quadcone::localdens {

using expsums::CongruenceData;
using quadform::QuadraticForm;

class NotStabilizedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsolubleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LocalDensity {
    enum class Method { closed_form, raw_count };
    u64 p = 0;
    Rational value{0};
    int stabilized_at = 0;
    Method method = Method::closed_form;
};

/// #{v mod p^k : F(v) ≡ 0, v ≡ Γ mod p^{ord_p L}, v ≢ 0 mod p}
i64 primitive_count(const QuadraticForm& F, u64 p, const std::optional<CongruenceData>& cong, int k);

/// σ_p = lim #{v ∈ 𝒲(Z/p^k), v ≡ Γ}/p^{3k}. Good primes use the closed form unless force_count.
LocalDensity sigma_p(const QuadraticForm& F, u64 p, const std::optional<CongruenceData>& cong, int max_k = 10,
                     bool force_count = false);

/// Closed form at p ∤ 2ΔL: (p² + (1+ψ)p + 1)/(p(p+1)).
Rational sigma_p_good(const QuadraticForm& F, u64 p);

/// The primes dividing 2ΔL.
std::vector<u64> bad_primes(const QuadraticForm& F, i64 L);

struct SeriesValue {
    double value = 0;        // completed through 𝕃(2, ψχ₀[L])
    double partial = 0;      // product truncated at p_max
    double tail_bound = 0;   // relative bound for the truncated product
    i64 truncation_prime = 0;
    std::map<u64, Rational> bad_factors;  // (1 − ψ(p)/p)σ_p for p | 2ΔL
};

/// 𝔖̃_{L,Γ}(𝒲) = 𝕃(1,ψ_F) ∏_p (1 − ψ_F(p)/p) σ_p
SeriesValue singular_series_W(const QuadraticForm& F, const CongruenceData& cong, double tol = 1e-6,
                              i64 p_max = 10000);

struct DensityReport {
    double series_W = 0;
    double tamagawa_V = 0;
    double omega_f = 0;
    i64 truncation_prime = 0;
    double tail_bound = 0;
    std::map<std::string, double> l_values;
    bool window_flag = false;  // tamagawa_V·L² outside [1e-3, 1e3]
};

DensityReport measures(const QuadraticForm& F, const CongruenceData& cong, double tol = 1e-6, i64 p_max = 10000);

/// σ_p > 0 at every p | 2ΔL
bool locally_soluble(const QuadraticForm& F, const CongruenceData& cong);

/// ω_f of a union of classes mod L; insoluble classes contribute 0.
double omega_f_union(const QuadraticForm& F, i64 L, const std::vector<Vec4>& classes, double tol = 1e-6);

/// 𝕃_p(s, Pic) = (1 − ψ(p)p^{-s})^{-1}(1 − p^{-s})^{-1}
double artin_local_factor(const QuadraticForm& F, u64 p, double s);

/// 𝒦 for the class on the given real component: ±ℐ·ω_f·𝕃(2, ψχ₀[L]), the sign
/// positive when the pair meets the Brauer–Manin set; 0 when ε ∤ L.
double K_closed(const QuadraticForm& F, const CongruenceData& cong, int component, double I, double tol = 1e-6);

}  // namespace quadcone::localdens
