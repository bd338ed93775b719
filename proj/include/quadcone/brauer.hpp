#pragma once

// Hilbert symbols and the local invariants of the quaternion class (Δ_F, g)
// on congruence neighbourhoods of the punctured cone.

#include <array>
#include <map>
#include <stdexcept>

#include "quadcone/expsums.hpp"

namespace quadcone::brauer {

using expsums::CongruenceData;
using quadform::QuadraticForm;

/// p = 0 is the real place.
struct Place {
    u64 p = 0;
    static Place infinity() { return {0}; }
    static Place prime(u64 p) { return {p}; }
    bool is_infinite() const { return p == 0; }
};

class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class InsolubleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NotLocallyConstantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int hilbert_symbol(i64 a, i64 b, Place v);
/// 0 for +1, 1/2 for −1
Rational invariant_of_symbol(int s);

struct LocalOptions {
    u64 seed = 1;
    int samples = 12;     // certified lifts compared for local constancy
    int width = 48;       // residues kept per lifting level
    int max_level = 36;
};

/// inv_p(Δ_F, g(x_p)) on 𝒲^o(Z_p) ∩ {x ≡ Γ mod p^{ord_p L}}.
Rational invariant_at_p(const QuadraticForm& F, const Vec4& g, u64 p, const CongruenceData& cong,
                        const LocalOptions& opt = {});
/// inv_∞(Δ_F, g) restricted to a real component.
Rational invariant_at_infinity(const QuadraticForm& F, const Vec4& g, int component, u64 seed = 1);

struct BrauerEvaluation {
    std::map<u64, Rational> per_prime;
    Rational rho_f{0};
    std::array<Rational, 2> component_inv{Rational(0), Rational(0)};
    std::array<int, 2> xi{0, 0};
    int components = 1;
};

/// The primes dividing 2Δ_F·L·content(g).
std::vector<u64> relevant_primes(const QuadraticForm& F, const Vec4& g, i64 L);

Rational rho_f_eval(const QuadraticForm& F, const Vec4& g, const CongruenceData& cong, const LocalOptions& opt = {});
BrauerEvaluation evaluate(const QuadraticForm& F, const Vec4& g, const CongruenceData& cong,
                          const LocalOptions& opt = {});
/// 2 when the class–component pair meets the Brauer–Manin set, else 0.
int xi_density(const QuadraticForm& F, const Vec4& g, const CongruenceData& cong, int component,
               const LocalOptions& opt = {});

/// For a base pair meeting the Brauer–Manin set: is the γ-twist obstructed?
bool obstructed_by_character(const QuadraticForm& F, const Vec4& g, const CongruenceData& base, int component,
                             i64 gamma);

}  // namespace quadcone::brauer
