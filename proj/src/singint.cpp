#include "quadcone/singint.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gsl/gsl_integration.h>

namespace quadcone::singint {

namespace {

struct Frame {
    int k;
    std::array<int, 3> o;
    lattice::Shape box;
};

Frame make_frame(const WeightFunction& wb, int k) {
    Frame f;
    f.k = k;
    int j = 0;
    for (int i = 0; i < 4; ++i)
        if (i != k) f.o[j++] = i;
    f.box = wb.shapes(1.0).front();
    return f;
}

// F(y + t e_k) = a t² + b t + c
struct Line {
    double a, b, c;
};

Line restrict(const QuadraticForm& F, int k, const Vec4d& y) {
    const auto& A = F.gram;
    double b = 0, c = 0;
    for (int i = 0; i < 4; ++i) {
        if (i == k) continue;
        b += 2.0 * (double)A[k][i] * y[i];
        for (int j = 0; j < 4; ++j)
            if (j != k) c += (double)A[i][j] * y[i] * y[j];
    }
    return {(double)A[k][k], b, c};
}

double pairwise_sum(const std::vector<double>& v, size_t lo, size_t hi) {
    if (hi - lo <= 8) {
        double s = 0;
        for (size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

// Σ over real roots of w/|∂_kF| at the grid point y
template <class Visit>
double surface_point(const QuadraticForm& F, const WeightFunction& wb, int k, Vec4d y, Visit&& visit) {
    Line l = restrict(F, k, y);
    double D = l.b * l.b - 4 * l.a * l.c;
    if (D < 0) return 0.0;
    double s = std::sqrt(D), acc = 0;
    for (double sg : {-1.0, 1.0}) {
        if (sg > 0 && s == 0) break;
        y[k] = (-l.b + sg * s) / (2 * l.a);
        double wv = wb(F, y);
        if (wv == 0) continue;
        visit(y, s);
        acc += wv / s;
    }
    return acc;
}

double surface_grid(const QuadraticForm& F, const WeightFunction& wb, const Frame& fr, int n) {
    const auto& bx = fr.box;
    double lo[3], h[3];
    for (int i = 0; i < 3; ++i) {
        lo[i] = bx.coord_min(fr.o[i]);
        h[i] = (bx.coord_max(fr.o[i]) - lo[i]) / n;
    }
    std::vector<double> slices(n, 0.0);
    for (int i0 = 0; i0 < n; ++i0) {
        std::vector<double> row(n, 0.0);
        for (int i1 = 0; i1 < n; ++i1) {
            double s = 0;
            for (int i2 = 0; i2 < n; ++i2) {
                Vec4d y{0, 0, 0, 0};
                y[fr.o[0]] = lo[0] + (i0 + 0.5) * h[0];
                y[fr.o[1]] = lo[1] + (i1 + 0.5) * h[1];
                y[fr.o[2]] = lo[2] + (i2 + 0.5) * h[2];
                s += surface_point(F, wb, fr.k, y, [](const Vec4d&, double g) {
                    if (g < 1e-8) throw SingularSurfaceError("leray_surface: |dF/dx_k| vanishes on the support");
                });
            }
            row[i1] = s;
        }
        slices[i0] = pairwise_sum(row, 0, row.size());
    }
    return pairwise_sum(slices, 0, slices.size()) * h[0] * h[1] * h[2];
}

// intervals of t with |a t² + b t + c| < ε
int slab_intervals(Line l, double eps, double out[2][2]) {
    if (l.a < 0) {
        l.a = -l.a;
        l.b = -l.b;
        l.c = -l.c;
    }
    double Dp = l.b * l.b - 4 * l.a * (l.c - eps);  // roots of q − ε
    if (Dp <= 0) return 0;
    double sp = std::sqrt(Dp);
    double r1 = (-l.b - sp) / (2 * l.a), r2 = (-l.b + sp) / (2 * l.a);
    double Dm = l.b * l.b - 4 * l.a * (l.c + eps);  // roots of q + ε
    if (Dm <= 0) {
        out[0][0] = r1;
        out[0][1] = r2;
        return 1;
    }
    double sm = std::sqrt(Dm);
    out[0][0] = r1;
    out[0][1] = (-l.b - sm) / (2 * l.a);
    out[1][0] = (-l.b + sm) / (2 * l.a);
    out[1][1] = r2;
    return 2;
}

// min |∂_kF|/|∇F| over zeros in the support hit by a coarse grid; 2 when none
double min_gradient_ratio(const QuadraticForm& F, const WeightFunction& wb, int k) {
    Frame fr = make_frame(wb, k);
    const int n = 12;
    double worst = 2;
    for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2) {
                Vec4d y{0, 0, 0, 0};
                int idx[3] = {i0, i1, i2};
                for (int i = 0; i < 3; ++i) {
                    double lo = fr.box.coord_min(fr.o[i]), hi = fr.box.coord_max(fr.o[i]);
                    y[fr.o[i]] = lo + (idx[i] + 0.5) * (hi - lo) / n;
                }
                surface_point(F, wb, k, y, [&](const Vec4d& x, double g) {
                    auto gr = F.grad(x);
                    double nrm = std::sqrt(gr[0] * gr[0] + gr[1] * gr[1] + gr[2] * gr[2] + gr[3] * gr[3]);
                    if (nrm > 0) worst = std::min(worst, g / nrm);
                });
            }
    return worst;
}

}  // namespace

// samples the fold {F = 0, ∂_kF = 0}: x_k = ℓ(y), G(y) = F(y, ℓ(y)) = 0
bool fold_meets_support(const QuadraticForm& F, const WeightFunction& wb, int k) {
    Frame fr = make_frame(wb, k);
    const auto& A = F.gram;
    auto fold_point = [&](Vec4d y) {
        double s = 0;
        for (int j = 0; j < 4; ++j)
            if (j != k) s += (double)A[k][j] * y[j];
        y[k] = -s / (double)A[k][k];
        return y;
    };
    const int n = 48;
    const int o2 = fr.o[2];
    const double lo2 = fr.box.coord_min(o2), hi2 = fr.box.coord_max(o2);
    for (int i0 = 0; i0 <= n; ++i0)
        for (int i1 = 0; i1 <= n; ++i1) {
            Vec4d y{0, 0, 0, 0};
            int idx[2] = {i0, i1};
            for (int i = 0; i < 2; ++i) {
                double lo = fr.box.coord_min(fr.o[i]), hi = fr.box.coord_max(fr.o[i]);
                y[fr.o[i]] = lo + idx[i] * (hi - lo) / n;
            }
            auto G = [&](double t) {
                Vec4d z = y;
                z[o2] = t;
                return F.eval(fold_point(z));
            };
            double g0 = G(0), gp = G(1), gm = G(-1);
            double c1 = (gp - gm) / 2, c2 = (gp + gm) / 2 - g0;
            double roots[2];
            int nr = 0;
            if (std::abs(c2) > 1e-14) {
                double D = c1 * c1 - 4 * c2 * g0;
                if (D < 0) continue;
                roots[nr++] = (-c1 - std::sqrt(D)) / (2 * c2);
                roots[nr++] = (-c1 + std::sqrt(D)) / (2 * c2);
            } else if (std::abs(c1) > 1e-14) {
                roots[nr++] = -g0 / c1;
            }
            for (int r = 0; r < nr; ++r) {
                if (roots[r] < lo2 || roots[r] > hi2) continue;
                y[o2] = roots[r];
                if (wb(F, fold_point(y)) > 0) return true;
            }
        }
    return false;
}

int choose_coordinate(const QuadraticForm& F, const WeightFunction& w) {
    const WeightFunction wb = w.base();
    int best = -1;
    double best_ratio = -1;
    for (int k = 0; k < 4; ++k) {
        if (F.gram[k][k] == 0) continue;
        double r = min_gradient_ratio(F, wb, k);
        if (r > best_ratio) {
            best_ratio = r;
            best = k;
        }
    }
    if (best < 0) throw std::invalid_argument("singint: the form has no nonzero diagonal entry");
    return best;
}

LerayResult leray_surface(const QuadraticForm& F, const WeightFunction& w, int grid, int coordinate) {
    if (grid < 4 || grid % 2) throw std::invalid_argument("leray_surface: grid must be even and at least 4");
    w.validate();
    const WeightFunction wb = w.base();
    const double mult = w.symmetric ? 2.0 : 1.0;  // F and dx are invariant under x ↦ −x
    LerayResult r;
    r.method = LerayResult::Method::surface_quadrature;
    if (coordinate < 0) {
        r.coordinate = choose_coordinate(F, w);
    } else {
        if (coordinate > 3 || F.gram[coordinate][coordinate] == 0)
            throw std::invalid_argument("leray_surface: coordinate needs a nonzero diagonal entry");
        r.coordinate = coordinate;
    }
    if (fold_meets_support(F, wb, r.coordinate))
        throw SingularSurfaceError("leray_surface: dF/dx_k vanishes on the support");
    Frame fr = make_frame(wb, r.coordinate);
    double fine = surface_grid(F, wb, fr, grid), coarse = surface_grid(F, wb, fr, grid / 2);
    r.value = mult * fine;
    r.est_error = mult * std::abs(fine - coarse);
    r.samples_or_nodes = (i64)grid * grid * grid;
    return r;
}

LerayResult leray_slab(const QuadraticForm& F, const WeightFunction& w, const std::vector<double>& eps, int samples,
                       u64 seed) {
    if (eps.size() < 3) throw std::invalid_argument("leray_slab: need at least three values of epsilon");
    for (size_t i = 0; i < eps.size(); ++i)
        if (!(eps[i] > 0) || (i && eps[i] >= eps[i - 1]))
            throw std::invalid_argument("leray_slab: epsilon schedule must be positive and decreasing");
    w.validate();
    const WeightFunction wb = w.base();
    const double mult = w.symmetric ? 2.0 : 1.0;
    LerayResult r;
    r.method = LerayResult::Method::slab_limit;
    r.coordinate = choose_coordinate(F, w);
    Frame fr = make_frame(wb, r.coordinate);
    const int k = fr.k;
    const double klo = fr.box.coord_min(k), khi = fr.box.coord_max(k);

    const int m = std::max(2, (int)std::llround(std::cbrt(samples / 8.0)));
    double lo[3], h[3], vol = 1;
    for (int i = 0; i < 3; ++i) {
        lo[i] = fr.box.coord_min(fr.o[i]);
        h[i] = (fr.box.coord_max(fr.o[i]) - lo[i]) / m;
        vol *= h[i];
    }
    const size_t ne = eps.size();
    gsl_integration_glfixed_table* gl = gsl_integration_glfixed_table_alloc(16);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    // independent jitter sets; their spread gives the sampling error
    constexpr int kSets = 8;
    std::vector<std::vector<double>> est(kSets, std::vector<double>(ne, 0.0));
    for (int set = 0; set < kSets; ++set) {
        std::vector<std::vector<double>> slices(ne, std::vector<double>(m, 0.0));
        for (int i0 = 0; i0 < m; ++i0)
            for (int i1 = 0; i1 < m; ++i1)
                for (int i2 = 0; i2 < m; ++i2) {
                    Vec4d y{0, 0, 0, 0};
                    int idx[3] = {i0, i1, i2};
                    for (int i = 0; i < 3; ++i) y[fr.o[i]] = lo[i] + (idx[i] + U(rng)) * h[i];
                    Line l = restrict(F, k, y);
                    for (size_t e = 0; e < ne; ++e) {
                        double iv[2][2];
                        int n = slab_intervals(l, eps[e], iv);
                        double acc = 0;
                        for (int q = 0; q < n; ++q) {
                            double a = std::max(iv[q][0], klo), b = std::min(iv[q][1], khi);
                            if (a >= b) continue;
                            for (size_t g = 0; g < 16; ++g) {
                                double t, wt;
                                gsl_integration_glfixed_point(a, b, g, &t, &wt, gl);
                                y[k] = t;
                                acc += wt * wb(F, y);
                            }
                        }
                        slices[e][i0] += acc / (2 * eps[e]);
                    }
                }
        for (size_t e = 0; e < ne; ++e) est[set][e] = pairwise_sum(slices[e], 0, m) * vol;
    }
    gsl_integration_glfixed_table_free(gl);

    // V(ε) = I + c₁ε² + … : Richardson through all points, and through the last two
    auto extrapolate = [&](const std::vector<double>& V, size_t first) {
        // Neville on x = ε², evaluated at 0
        std::vector<double> P(V.begin() + first, V.end());
        std::vector<double> x;
        for (size_t i = first; i < ne; ++i) x.push_back(eps[i] * eps[i]);
        const size_t n = P.size();
        for (size_t lvl = 1; lvl < n; ++lvl)
            for (size_t i = 0; i + lvl < n; ++i)
                P[i] = (x[i + lvl] * P[i] - x[i] * P[i + 1]) / (x[i + lvl] - x[i]);
        return P[0];
    };
    std::vector<double> V(ne, 0.0), ext(kSets);
    for (int set = 0; set < kSets; ++set) {
        for (size_t e = 0; e < ne; ++e) V[e] += est[set][e] / kSets;
        ext[set] = extrapolate(est[set], 0);
    }
    double full = extrapolate(V, 0), two = extrapolate(V, ne - 2);
    double var = 0;
    for (double x : ext) var += (x - full) * (x - full);
    const double stderr_mean = std::sqrt(var / (kSets - 1) / kSets);
    r.value = mult * full;
    r.est_error = mult * (std::abs(full - two) + 3 * stderr_mean);
    r.samples_or_nodes = (i64)kSets * m * m * m;
    for (double v : V) r.raw.push_back(mult * v);
    for (size_t e = 1; e < ne; ++e)
        if (std::abs(V[e] - full) > std::abs(V[e - 1] - full)) r.converged = false;
    return r;
}

}  // namespace quadcone::singint
