#pragma once

// Exact elements of Z[ζ_N] stored as Σ c_j ζ_N^j over all exponents j mod N.
// The representation is not unique (the ζ_N^j are linearly dependent); equality
// and rationality are decided on the remainder modulo the cyclotomic polynomial Φ_N.

#include <complex>
#include <optional>
#include <vector>

#include "quadcone/arith.hpp"

namespace quadcone {

class CycloInt {
public:
    CycloInt() : CycloInt(1) {}
    explicit CycloInt(i64 N);
    static CycloInt integer(i64 N, i64 v);
    static CycloInt root(i64 N, i64 k);

    i64 order() const { return N_; }
    const std::vector<i64>& coeffs() const { return c_; }

    /// c_k += m, i.e. add m·ζ_N^k
    void add_power(i64 k, i64 m) { c_[arith::mod(k, N_)] += m; }
    void add_rotated(const CycloInt& o, i64 k, i64 m = 1);

    CycloInt& operator+=(const CycloInt& o);
    CycloInt& operator-=(const CycloInt& o);
    CycloInt operator+(const CycloInt& o) const;
    CycloInt operator-(const CycloInt& o) const;
    CycloInt operator*(const CycloInt& o) const;
    CycloInt scaled(i64 m) const;
    /// multiply by ζ_N^k
    CycloInt rotated(i64 k) const;
    /// the same element viewed in Z[ζ_M], N | M
    CycloInt lifted(i64 M) const;
    /// apply ζ -> ζ^t, gcd(t, N) = 1
    CycloInt galois(i64 t) const;

    /// remainder modulo Φ_N, degree < φ(N)
    std::vector<i64> reduced() const;
    bool is_zero() const;
    std::optional<i64> as_integer() const;
    std::complex<double> to_complex() const;

    bool operator==(const CycloInt& o) const;
    bool operator!=(const CycloInt& o) const { return !(*this == o); }

private:
    i64 N_;
    std::vector<i64> c_;
};

/// Φ_N as an integer coefficient vector (lowest degree first).
std::vector<i64> cyclotomic_polynomial(i64 N);

}  // namespace quadcone
