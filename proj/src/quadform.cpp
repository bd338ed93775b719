#include "quadcone/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace quadcone::quadform {

namespace {

constexpr i64 kMaxEntry = i64(1) << 20;

i128 det3(const Mat4& a, int skip_r, int skip_c) {
    int rs[3], cs[3];
    for (int i = 0, k = 0; i < 4; ++i)
        if (i != skip_r) rs[k++] = i;
    for (int j = 0, k = 0; j < 4; ++j)
        if (j != skip_c) cs[k++] = j;
    auto m = [&](int i, int j) { return (i128)a[rs[i]][cs[j]]; };
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

}  // namespace

i64 QuadraticForm::operator()(const Vec4& x) const {
    i64 s = 0;
    for (int i = 0; i < 4; ++i) {
        s += gram[i][i] * x[i] * x[i];
        for (int j = i + 1; j < 4; ++j) s += 2 * gram[i][j] * x[i] * x[j];
    }
    return s;
}

i128 QuadraticForm::eval128(const Vec4& x) const {
    i128 s = 0;
    for (int i = 0; i < 4; ++i) {
        s += (i128)gram[i][i] * x[i] * x[i];
        for (int j = i + 1; j < 4; ++j) s += (i128)2 * gram[i][j] * x[i] * x[j];
    }
    return s;
}

double QuadraticForm::eval(const Vec4d& x) const {
    double s = 0;
    for (int i = 0; i < 4; ++i) {
        s += gram[i][i] * x[i] * x[i];
        for (int j = i + 1; j < 4; ++j) s += 2.0 * gram[i][j] * x[i] * x[j];
    }
    return s;
}

Vec4 QuadraticForm::grad(const Vec4& x) const {
    Vec4 g{};
    for (int i = 0; i < 4; ++i) g[i] = 2 * (gram[i][0] * x[0] + gram[i][1] * x[1] + gram[i][2] * x[2] + gram[i][3] * x[3]);
    return g;
}

Vec4d QuadraticForm::grad(const Vec4d& x) const {
    Vec4d g{};
    for (int i = 0; i < 4; ++i) g[i] = 2.0 * (gram[i][0] * x[0] + gram[i][1] * x[1] + gram[i][2] * x[2] + gram[i][3] * x[3]);
    return g;
}

i64 QuadraticForm::adjoint_value(const Vec4& c) const {
    i64 s = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += adjoint[i][j] * c[i] * c[j];
    return s;
}

int QuadraticForm::component_of(const Vec4d& x) const {
    if (components.count == 1) return 0;
    double s = 0;
    for (int i = 0; i < 4; ++i) s += components.separator[i] * x[i];
    return s > 0 ? 0 : 1;
}

int QuadraticForm::component_of(const Vec4& x) const {
    return component_of(Vec4d{(double)x[0], (double)x[1], (double)x[2], (double)x[3]});
}

QuadraticForm form_invariants(const Mat4& gram) {
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (gram[i][j] != gram[j][i]) throw FormError(FormError::Code::NotSymmetric, "Gram matrix is not symmetric");
            if (std::abs(gram[i][j]) > kMaxEntry) throw FormError(FormError::Code::BadInput, "Gram entry too large");
        }
    QuadraticForm F;
    F.gram = gram;
    i128 det = 0;
    for (int j = 0; j < 4; ++j) det += ((j & 1) ? -1 : 1) * (i128)gram[0][j] * det3(gram, 0, j);
    if (det == 0) throw FormError(FormError::Code::Singular, "Gram matrix is singular");
    if (det > (i128)INT64_MAX / 8 || det < (i128)INT64_MIN / 8)
        throw FormError(FormError::Code::BadInput, "discriminant out of range");
    F.disc = (i64)det;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) F.adjoint[i][j] = (((i + j) & 1) ? -1 : 1) * (i64)det3(gram, j, i);

    Eigen::Matrix4d A;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A(i, j) = (double)gram[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(A);
    auto ev = es.eigenvalues();
    for (int i = 0; i < 4; ++i) (ev(i) > 0 ? F.n_plus : F.n_minus)++;
    if (F.n_plus == 0 || F.n_minus == 0)
        throw FormError(FormError::Code::NotIsotropic, "form is definite, hence not isotropic over R");
    if (arith::is_square(F.disc))
        throw FormError(FormError::Code::SquareDiscriminant, "discriminant is a perfect square (split form)");
    F.fund_disc = arith::fundamental_discriminant(F.disc);
    F.conductor = std::abs(F.fund_disc);
    F.components = RealComponentInfo{};
    if (F.disc < 0) {
        // signature (3,1) or (1,3): the lone eigenvalue's eigenvector splits the cone
        int lone = -1;
        for (int i = 0; i < 4; ++i) {
            bool pos = ev(i) > 0;
            int same = 0;
            for (int j = 0; j < 4; ++j) same += (ev(j) > 0) == pos;
            if (same == 1) lone = i;
        }
        Eigen::Vector4d v = es.eigenvectors().col(lone);
        for (int i = 0; i < 4; ++i) {
            if (std::abs(v(i)) > 1e-12) {
                if (v(i) < 0) v = -v;
                break;
            }
        }
        F.components.count = 2;
        for (int i = 0; i < 4; ++i) F.components.separator[i] = std::abs(v(i)) < 1e-15 ? 0.0 : v(i);
    }
    return F;
}

QuadraticForm diagonal(i64 a, i64 b, i64 c, i64 d) {
    Mat4 g{};
    g[0][0] = a;
    g[1][1] = b;
    g[2][2] = c;
    g[3][3] = d;
    return form_invariants(g);
}

QuadraticForm from_upper_triangle(const std::array<i64, 10>& u) {
    Mat4 g{};
    int k = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) g[i][j] = g[j][i] = u[k++];
    return form_invariants(g);
}

std::array<i64, 10> upper_triangle(const QuadraticForm& F) {
    std::array<i64, 10> u{};
    int k = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) u[k++] = F.gram[i][j];
    return u;
}

QuadraticForm from_polynomial(const std::array<i64, 10>& coeffs, bool* scaled) {
    bool odd = false;
    int k = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j, ++k)
            if (j > i && (coeffs[k] & 1)) odd = true;
    i64 s = odd ? 2 : 1;
    Mat4 g{};
    k = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j, ++k) {
            if (i == j) {
                g[i][i] = s * coeffs[k];
            } else {
                g[i][j] = g[j][i] = s * coeffs[k] / 2;
            }
        }
    if (scaled) *scaled = odd;
    return form_invariants(g);
}

int psi_F(const QuadraticForm& F, i64 n) { return arith::kronecker(4 * F.disc, n); }

arith::DirichletCharacter psi_character(const QuadraticForm& F) { return arith::DirichletCharacter::kronecker_of(4 * F.disc); }

arith::DirichletCharacter psi_primitive(const QuadraticForm& F) { return arith::DirichletCharacter::kronecker_of(F.fund_disc); }

RealComponentInfo real_components(const QuadraticForm& F) { return F.components; }

PointAndTangent find_point_and_tangent(const QuadraticForm& F, i64 bound) {
    if (bound < 1) throw std::invalid_argument("search bound must be >= 1");
    for (i64 h = 1; h <= bound; ++h) {
        Vec4 x;
        for (x[0] = h; x[0] >= -h; --x[0])
            for (x[1] = h; x[1] >= -h; --x[1])
                for (x[2] = h; x[2] >= -h; --x[2])
                    for (x[3] = h; x[3] >= -h; --x[3]) {
                        i64 m = std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2]), std::abs(x[3])});
                        if (m != h) continue;
                        int lead = 0;
                        while (x[lead] == 0) ++lead;
                        if (x[lead] < 0) continue;
                        if (std::gcd(std::gcd(x[0], x[1]), std::gcd(x[2], x[3])) != 1) continue;
                        if (F(x) != 0) continue;
                        Vec4 g = F.grad(x);
                        i64 c = std::gcd(std::gcd(g[0], g[1]), std::gcd(g[2], g[3]));
                        for (auto& gi : g) gi /= c;
                        return {x, g};
                    }
    }
    throw NotFoundError("no primitive zero of F with |x| <= " + std::to_string(bound));
}

std::string to_string(const QuadraticForm& F) {
    std::ostringstream os;
    os << "[";
    auto u = upper_triangle(F);
    for (int i = 0; i < 10; ++i) os << (i ? "," : "") << u[i];
    os << "]";
    return os.str();
}

}  // namespace quadcone::quadform
