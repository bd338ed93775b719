#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quadcone/singint.hpp"

using namespace quadcone;
using namespace quadcone::singint;
using lattice::WeightFunction;
using quadform::QuadraticForm;

namespace {

QuadraticForm form_a() { return quadform::diagonal(1, 1, 1, -1); }
QuadraticForm form_b() { return quadform::diagonal(1, 1, -1, -3); }

const std::vector<double> kEps{0.04, 0.02, 0.01};

// radial bump on the upper sheet of x0²+x1²+x2² = x3²: 2π∫ρ w(ρ, ρ) dρ
double radial_reference(double R) {
    const int n = 400000;
    double s = 0;
    for (int i = 0; i < n; ++i) {
        double r = (i + 0.5) / n * 2;
        double t = (r * r + (r - 1) * (r - 1)) / (R * R);
        if (t < 1) s += r * std::exp(-1 / (1 - t));
    }
    return 2 * M_PI * s * 2 / n;
}

struct Pair {
    QuadraticForm F;
    WeightFunction w;
};

std::vector<Pair> pairs() {
    auto C = quadform::from_upper_triangle({1, 1, 0, 0, 2, 0, 1, -1, 0, -1});
    auto pt = quadform::find_point_and_tangent(C, 10).x0;
    double n = 0;
    for (auto v : pt) n += (double)v * v;
    n = std::sqrt(n);
    Vec4d c{pt[0] / n, pt[1] / n, pt[2] / n, pt[3] / n};
    return {{form_a(), WeightFunction::bump({0, 0, 0, 1}, 0.9, 0)},
            {form_a(), WeightFunction::bump({0.6, 0, 0.8, 1}, 0.5)},
            {form_b(), WeightFunction::bump({1, 0, 0.5, 0.5}, 0.4)},
            {form_b(), WeightFunction::bump({1, 0, 0.5, 0.5}, 0.4, -1, true)},
            {C, WeightFunction::bump(c, 0.3)}};
}

}  // namespace

TEST_CASE("surface quadrature against the radial reduction") {
    auto r = leray_surface(form_a(), WeightFunction::bump({0, 0, 0, 1}, 0.9, 0));
    CHECK(r.coordinate == 3);
    CHECK(r.value == doctest::Approx(radial_reference(0.9)).epsilon(1e-7));
    auto r2 = leray_surface(form_a(), WeightFunction::bump({0, 0, 0, 1}, 0.9, 0), 128);
    CHECK(std::abs(r2.value - r.value) < 0.01 * r.value);
    CHECK(std::abs(r2.value - r.value) <= r.est_error + 1e-12);
}

TEST_CASE("weights missing the cone integrate to zero") {
    // the cone keeps distance 1/√2 from (0,0,0,1)
    auto w = WeightFunction::bump({0, 0, 0, 1}, 0.5);
    CHECK(leray_surface(form_a(), w).value == 0.0);
    CHECK(leray_slab(form_a(), w, kEps, 1 << 12).value == 0.0);
}

TEST_CASE("homogeneity of degree two") {
    for (const auto& p : pairs()) {
        auto base = leray_surface(p.F, p.w);
        for (double s : {2.0, 3.0}) {
            auto sc = leray_surface(p.F, p.w.scaled(s));
            CHECK(std::abs(sc.value - s * s * base.value) <= sc.est_error + s * s * base.est_error + 1e-12 * sc.value);
        }
    }
}

TEST_CASE("surface and slab estimators agree") {
    for (const auto& p : pairs()) {
        auto a = leray_surface(p.F, p.w);
        auto b = leray_slab(p.F, p.w, kEps);
        INFO(quadform::to_string(p.F));
        CHECK(a.value > 0);
        CHECK(b.converged);
        CHECK(std::abs(a.value - b.value) < 0.01 * a.value);
        CHECK(std::abs(a.value - b.value) <= a.est_error + b.est_error);
    }
}

TEST_CASE("slab bias is quadratic in epsilon") {
    auto F = form_a();
    auto w = WeightFunction::bump({0.6, 0, 0.8, 1}, 0.5);
    double I = leray_surface(F, w).value;
    auto r = leray_slab(F, w, {0.4, 0.2, 0.1}, 1 << 18, 3);
    double b0 = r.raw[0] - I, b1 = r.raw[1] - I, b2 = r.raw[2] - I;
    // halving ε divides the bias by about 4
    CHECK(b0 / b1 > 4 / 1.5);
    CHECK(b0 / b1 < 4 * 1.5);
    CHECK(b1 / b2 > 4 / 1.5);
    CHECK(b1 / b2 < 4 * 1.5);
}

TEST_CASE("slab estimator is deterministic given the seed") {
    auto p = pairs()[2];
    auto a = leray_slab(p.F, p.w, kEps, 1 << 14, 9);
    auto b = leray_slab(p.F, p.w, kEps, 1 << 14, 9);
    CHECK(a.value == b.value);
    CHECK(a.est_error == b.est_error);
}

TEST_CASE("monotone in the weight") {
    auto F = form_a();
    // a smaller radius at the same center is pointwise smaller
    auto small = leray_surface(F, WeightFunction::bump({0.6, 0, 0.8, 1}, 0.3));
    auto big = leray_surface(F, WeightFunction::bump({0.6, 0, 0.8, 1}, 0.5));
    CHECK(small.value <= big.value + small.est_error + big.est_error);
    CHECK(small.value > 0);
    auto comp = leray_surface(F, WeightFunction::bump({0.6, 0, 0.8, 1}, 0.5, 0));
    auto sym = leray_surface(F, WeightFunction::bump({0.6, 0, 0.8, 1}, 0.5, -1, true));
    CHECK(comp.value <= big.value + comp.est_error + big.est_error);
    CHECK(sym.value == doctest::Approx(2 * big.value).epsilon(1e-12));
}

TEST_CASE("errors") {
    auto F = form_a();
    auto w = WeightFunction::bump({0, 0.6, 0.8, 1}, 0.3);
    // x0 = 0 on the center of the support, so ∂F/∂x0 vanishes there
    CHECK_THROWS_AS(leray_surface(F, w, 32, 0), SingularSurfaceError);
    CHECK_NOTHROW(leray_surface(F, w, 32, 3));
    CHECK_THROWS_AS(leray_surface(F, w, 31), std::invalid_argument);
    CHECK_THROWS_AS(leray_slab(F, w, {0.1, 0.2, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(leray_slab(F, w, {0.1, 0.05}), std::invalid_argument);
}
