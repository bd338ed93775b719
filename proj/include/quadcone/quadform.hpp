#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "quadcone/arith.hpp"

namespace quadcone {

using Vec4 = std::array<i64, 4>;
using Vec4d = std::array<double, 4>;
using Mat4 = std::array<std::array<i64, 4>, 4>;

inline i64 dot(const Vec4& a, const Vec4& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]; }

class FormError : public std::invalid_argument {
public:
    enum class Code { NotSymmetric, Singular, SquareDiscriminant, NotIsotropic, BadInput };
    FormError(Code c, const std::string& msg) : std::invalid_argument(msg), code(c) {}
    Code code;
};

namespace quadform {

struct RealComponentInfo {
    int count = 1;
    Vec4d separator{0, 0, 0, 0};  // meaningful when count == 2
};

/// Integral quaternary form F(x) = xᵀAx with non-square discriminant.
struct QuadraticForm {
    Mat4 gram{};
    i64 disc = 0;
    Mat4 adjoint{};
    i64 fund_disc = 0;   // discriminant of Q(√Δ)
    i64 conductor = 0;   // |fund_disc|
    int n_plus = 0, n_minus = 0;
    RealComponentInfo components;

    i64 operator()(const Vec4& x) const;
    i128 eval128(const Vec4& x) const;
    double eval(const Vec4d& x) const;
    /// ∇F(x) = 2Ax
    Vec4 grad(const Vec4& x) const;
    Vec4d grad(const Vec4d& x) const;
    /// F*(c) = cᵀ adj(A) c
    i64 adjoint_value(const Vec4& c) const;
    /// 0 or 1 by the sign of separator·x (always 0 when Δ > 0)
    int component_of(const Vec4d& x) const;
    int component_of(const Vec4& x) const;
    bool operator==(const QuadraticForm& o) const { return gram == o.gram; }
};

QuadraticForm form_invariants(const Mat4& gram);
QuadraticForm diagonal(i64 a, i64 b, i64 c, i64 d);
/// Gram matrix from its upper triangle in row-major order (10 entries).
QuadraticForm from_upper_triangle(const std::array<i64, 10>& upper);
std::array<i64, 10> upper_triangle(const QuadraticForm& F);
/// Polynomial coefficients a_ii of x_i² and b_ij of x_i x_j (i<j), ordered
/// a00 b01 b02 b03 a11 b12 b13 a22 b23 a33; scales by 2 when some b_ij is odd.
QuadraticForm from_polynomial(const std::array<i64, 10>& coeffs, bool* scaled = nullptr);

int psi_F(const QuadraticForm& F, i64 n);
arith::DirichletCharacter psi_character(const QuadraticForm& F);
/// The primitive character inducing ψ_F, i.e. (fund_disc/·).
arith::DirichletCharacter psi_primitive(const QuadraticForm& F);

RealComponentInfo real_components(const QuadraticForm& F);

struct PointAndTangent {
    Vec4 x0;
    Vec4 g;  // g(X) = g·X
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// First primitive zero in |x|∞ shells (lexicographically descending, first nonzero
/// coordinate positive) and the tangent form ∇F(x₀)·X divided by its content.
PointAndTangent find_point_and_tangent(const QuadraticForm& F, i64 search_bound);

std::string to_string(const QuadraticForm& F);

}  // namespace quadform
}  // namespace quadcone
