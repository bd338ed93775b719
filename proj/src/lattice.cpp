#include "quadcone/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

namespace quadcone::lattice {

namespace {

using arith::mod;

constexpr int kChunks = 64;

// quadratic residue filters
struct SquareFilter {
    bool m64[64], m63[63], m65[65], m11[11];
    SquareFilter() {
        std::memset(this, 0, sizeof(*this));
        for (int i = 0; i < 64; ++i) m64[i * i % 64] = true;
        for (int i = 0; i < 63; ++i) m63[i * i % 63] = true;
        for (int i = 0; i < 65; ++i) m65[i * i % 65] = true;
        for (int i = 0; i < 11; ++i) m11[i * i % 11] = true;
    }
};
const SquareFilter kSq;

constexpr u64 square_mask64() {
    u64 m = 0;
    for (u64 i = 0; i < 64; ++i) m |= u64(1) << (i * i % 64);
    return m;
}
constexpr u64 kSquareMask64 = square_mask64();

constexpr i64 kResMod = 45045;  // 5·7·9·11·13
struct ResidueTable {
    std::vector<unsigned char> sq;
    ResidueTable() : sq(kResMod, 0) {
        for (i64 i = 0; i < kResMod; ++i) sq[i * i % kResMod] = 1;
    }
};
const ResidueTable kRes;

// floor(sqrt(n)) if n is a perfect square, else -1
i128 exact_sqrt(i128 n) {
    if (n < 0) return -1;
    unsigned __int128 u = (unsigned __int128)n;
    if (!kSq.m64[(int)(u & 63)]) return -1;
    u64 r63 = (u64)(u % 45045);
    if (!kSq.m63[r63 % 63] || !kSq.m65[r63 % 65] || !kSq.m11[r63 % 11]) return -1;
    long double s = std::sqrt((long double)n);
    i128 r = (i128)s;
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r * r == n ? r : -1;
}

i64 ceil_congruent(double lo, i64 res, i64 L) {
    // least x ≥ lo with x ≡ res mod L
    i64 x = (i64)std::ceil(lo - 1e-9);
    return x + mod(res - x, L);
}

bool in_earlier(const std::vector<Shape>& shapes, size_t idx, const Vec4d& x) {
    for (size_t j = 0; j < idx; ++j)
        if (shapes[j].contains(x)) return true;
    return false;
}

struct Setup {
    const QuadraticForm* F;
    int k;              // distinguished coordinate
    std::array<int, 3> o;  // outer coordinates
    i64 L;
    Vec4 lam;
    bool primitive;
};

int distinguished(const QuadraticForm& F) {
    for (int i = 3; i >= 0; --i)
        if (F.gram[i][i] != 0) return i;
    return 3;
}

// intervals of t in [lo, hi] with α t² + β t + γ ≥ 0 (widened; exactness is checked later)
int nonneg_intervals(double al, double be, double ga, double lo, double hi, double out[2][2]) {
    auto put = [&](int n, double a, double b) {
        a = std::max(a - 1, lo);
        b = std::min(b + 1, hi);
        if (a <= b) {
            out[n][0] = a;
            out[n][1] = b;
            return n + 1;
        }
        return n;
    };
    if (al == 0) {
        if (be == 0) return ga >= 0 ? put(0, lo, hi) : 0;
        double r = -ga / be;
        return be > 0 ? put(0, r, hi) : put(0, lo, r);
    }
    double disc = be * be - 4 * al * ga;
    if (disc < 0) return al > 0 ? put(0, lo, hi) : 0;
    double s = std::sqrt(disc);
    double r1 = (-be - s) / (2 * al), r2 = (-be + s) / (2 * al);
    if (r1 > r2) std::swap(r1, r2);
    if (al < 0) return put(0, r1, r2);
    int n = put(0, lo, r1);
    n = put(n, r2, hi);
    if (n == 2 && out[1][0] <= out[0][1] + 1) {
        out[0][1] = std::max(out[0][1], out[1][1]);
        n = 1;
    }
    return n;
}

template <class Fn>
void enumerate_chunk(const Setup& S, const std::vector<Shape>& shapes, size_t si, int chunk, Fn&& fn) {
    const Shape& sh = shapes[si];
    const auto& A = S.F->gram;
    const int k = S.k, o0 = S.o[0], o1 = S.o[1], o2 = S.o[2];
    const i64 L = S.L;
    const i128 a = A[k][k];

    // outer coordinate o0 split into chunks by index
    i64 first0 = ceil_congruent(sh.coord_min(o0), S.lam[o0], L);
    double max0 = sh.coord_max(o0);
    if ((double)first0 > max0) return;
    i64 n0 = (i64)std::floor((max0 - (double)first0) / (double)L + 1e-9) + 1;
    i64 c_lo = n0 * chunk / kChunks, c_hi = n0 * (chunk + 1) / kChunks;
    for (i64 i0 = c_lo; i0 < c_hi; ++i0) {
        i64 x0 = first0 + L * i0;
        double lo1 = sh.coord_min(o1), hi1 = sh.coord_max(o1);
        double r0 = 0;
        if (sh.kind == Shape::Kind::ball) {
            double d = (double)x0 - sh.lo[o0];
            r0 = sh.radius * sh.radius - d * d;
            if (r0 < 0) continue;
            double h = std::sqrt(r0);
            lo1 = sh.lo[o1] - h;
            hi1 = sh.lo[o1] + h;
        }
        for (i64 x1 = ceil_congruent(lo1, S.lam[o1], L); (double)x1 <= hi1; x1 += L) {
            double lo2 = sh.coord_min(o2), hi2 = sh.coord_max(o2);
            if (sh.kind == Shape::Kind::ball) {
                double d = (double)x1 - sh.lo[o1];
                double r1 = r0 - d * d;
                if (r1 < 0) continue;
                double h = std::sqrt(r1);
                lo2 = sh.lo[o2] - h;
                hi2 = sh.lo[o2] + h;
            }
            // b = b0 + b1 t, c = c0 + c1 t + c2 t², t = x_{o2}
            i128 b0 = 2 * ((i128)A[k][o0] * x0 + (i128)A[k][o1] * x1), b1 = 2 * (i128)A[k][o2];
            i128 c0 = (i128)A[o0][o0] * x0 * x0 + (i128)A[o1][o1] * x1 * x1 + 2 * (i128)A[o0][o1] * x0 * x1;
            i128 c1 = 2 * ((i128)A[o0][o2] * x0 + (i128)A[o1][o2] * x1), c2 = A[o2][o2];
            double iv[2][2];
            int niv;
            if (a != 0)
                niv = nonneg_intervals((double)(b1 * b1 - 4 * a * c2), (double)(2 * b0 * b1 - 4 * a * c1),
                                       (double)(b0 * b0 - 4 * a * c0), lo2, hi2, iv);
            else {
                iv[0][0] = lo2;
                iv[0][1] = hi2;
                niv = 1;
            }
            // the exact work for one t; the fast loop below only filters
            auto handle = [&](i64 t) {
                i128 b = b0 + b1 * t, c = c0 + c1 * t + c2 * t * t;
                i64 roots[2];
                int nr = 0;
                bool whole_line = false;  // F vanishes along the x_k line
                if (a != 0) {
                    i128 s = exact_sqrt(b * b - 4 * a * c);
                    if (s < 0) return;
                    for (int sg : {-1, 1}) {
                        if (sg == 1 && s == 0) break;
                        i128 num = -b + sg * s;
                        if (num % (2 * a) != 0) continue;
                        roots[nr++] = (i64)(num / (2 * a));
                    }
                } else if (b != 0) {
                    if (c % b != 0) return;
                    roots[nr++] = (i64)(-c / b);
                } else {
                    if (c != 0) return;
                    whole_line = true;
                }
                auto emit = [&](i64 xk) {
                    Vec4 x;
                    x[o0] = x0;
                    x[o1] = x1;
                    x[o2] = t;
                    x[k] = xk;
                    if (mod(x[k] - S.lam[k], L) != 0 || x == Vec4{0, 0, 0, 0}) return;
                    Vec4d xd{(double)x[0], (double)x[1], (double)x[2], (double)x[3]};
                    if (!sh.contains(xd) || in_earlier(shapes, si, xd)) return;
                    if (S.primitive && std::gcd(std::gcd(x[0], x[1]), std::gcd(x[2], x[3])) != 1) return;
                    fn(x);
                };
                for (int r = 0; r < nr; ++r) emit(roots[r]);
                if (whole_line)
                    for (i64 y = ceil_congruent(sh.coord_min(k), S.lam[k], L); (double)y <= sh.coord_max(k); y += L)
                        emit(y);
            };
            const i128 al = b1 * b1 - 4 * a * c2, be = 2 * b0 * b1 - 4 * a * c1, ga = b0 * b0 - 4 * a * c0;
            for (int q = 0; q < niv; ++q) {
                i64 t = ceil_congruent(iv[q][0], S.lam[o2], L);
                const double tend = iv[q][1];
                double T = std::max(std::abs((double)t), std::abs(tend)) + (double)L;
                bool fast = a != 0 && std::abs((double)al) * T * T + std::abs((double)be) * T + std::abs((double)ga) < 4e18;
                if (!fast) {
                    for (; (double)t <= tend; t += L) handle(t);
                    continue;
                }
                // D(t) = al t² + be t + ga, stepped by finite differences
                i64 D = (i64)(al * t * t + be * t + ga);
                i64 d1 = (i64)(al * (2 * (i128)t * L + (i128)L * L) + be * L);
                const i64 d2 = (i64)(2 * al * L * L);
                i64 Dr = mod(D, kResMod), d1r = mod(d1, kResMod);
                const i64 d2r = mod(d2, kResMod);
                const unsigned char* sq = kRes.sq.data();
                for (; (double)t <= tend; t += L, D += d1, d1 += d2) {
                    const bool pass = sq[Dr];
                    Dr += d1r;
                    if (Dr >= kResMod) Dr -= kResMod;
                    d1r += d2r;
                    if (d1r >= kResMod) d1r -= kResMod;
                    if (!pass || D < 0 || !((kSquareMask64 >> (D & 63)) & 1)) continue;
                    i64 r = (i64)std::sqrt((double)D);
                    while ((i128)r * r > D) --r;
                    while ((i128)(r + 1) * (r + 1) <= D) ++r;
                    if ((i128)r * r == D) handle(t);
                }
            }
        }
    }
}

Setup make_setup(const QuadraticForm& F, const std::optional<CongruenceData>& cong, bool primitive) {
    Setup S;
    S.F = &F;
    S.k = distinguished(F);
    int j = 0;
    for (int i = 0; i < 4; ++i)
        if (i != S.k) S.o[j++] = i;
    S.L = cong ? cong->L : 1;
    S.lam = cong ? cong->lambda : Vec4{0, 0, 0, 0};
    S.primitive = primitive;
    if (cong) expsums::validate(F, *cong);
    return S;
}

// runs fn(chunk_id, shape_index) over all work items, results merged by the caller in item order
template <class Work>
void run_items(int n_items, int threads, Work&& work) {
    threads = std::max(1, std::min(threads, n_items));
    if (threads == 1) {
        for (int i = 0; i < n_items; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int i = t; i < n_items; i += threads) work(i);
        });
    for (auto& th : pool) th.join();
}

void write_dump(const std::string& path, const std::vector<Vec4>& pts) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open dump file " + path);
    for (auto& x : pts)
        for (int i = 0; i < 4; ++i) {
            u64 v = (u64)x[i];
            unsigned char b[8];
            for (int j = 0; j < 8; ++j) b[j] = (unsigned char)(v >> (8 * j));
            f.write((const char*)b, 8);
        }
}

}  // namespace

bool Shape::contains(const Vec4d& x) const {
    if (kind == Kind::ball) {
        double s = 0;
        for (int i = 0; i < 4; ++i) s += (x[i] - lo[i]) * (x[i] - lo[i]);
        return s < radius * radius;
    }
    for (int i = 0; i < 4; ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

WeightFunction WeightFunction::bump(const Vec4d& center, double radius, int component, bool symmetric) {
    WeightFunction w;
    w.kind = Kind::bump;
    w.center = center;
    w.radius = radius;
    w.component = component;
    w.symmetric = symmetric;
    w.validate();
    return w;
}

WeightFunction WeightFunction::box(const Vec4d& lo, const Vec4d& hi, int component, bool symmetric) {
    WeightFunction w;
    w.kind = Kind::box;
    w.lo = lo;
    w.hi = hi;
    w.component = component;
    w.symmetric = symmetric;
    w.validate();
    return w;
}

void WeightFunction::validate() const {
    if (kind == Kind::bump) {
        if (!(radius > 0)) throw std::invalid_argument("weight: radius must be positive");
        double n = 0;
        for (double v : center) n += v * v;
        if (std::sqrt(n) <= radius) throw std::invalid_argument("weight: support contains the origin");
        return;
    }
    bool has0 = true;
    for (int i = 0; i < 4; ++i) {
        if (lo[i] > hi[i]) throw std::invalid_argument("weight: empty box");
        if (lo[i] > 0 || hi[i] < 0) has0 = false;
    }
    if (has0) throw std::invalid_argument("weight: support contains the origin");
}

double WeightFunction::operator()(const QuadraticForm& F, const Vec4d& u) const {
    auto base = [&](const Vec4d& x) -> double {
        if (component >= 0 && F.component_of(x) != component) return 0.0;
        if (kind == Kind::bump) {
            double s = 0;
            for (int i = 0; i < 4; ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
            double t = s / (radius * radius);
            return t < 1 ? std::exp(-1.0 / (1.0 - t)) : 0.0;
        }
        for (int i = 0; i < 4; ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return 0.0;
        return 1.0;
    };
    double v = base(u);
    if (symmetric) v += base(Vec4d{-u[0], -u[1], -u[2], -u[3]});
    return v;
}

std::vector<Shape> WeightFunction::shapes(double B) const {
    std::vector<Shape> out;
    for (double sg : symmetric ? std::vector<double>{1, -1} : std::vector<double>{1}) {
        Shape s;
        if (kind == Kind::bump) {
            s.kind = Shape::Kind::ball;
            for (int i = 0; i < 4; ++i) s.lo[i] = sg * B * center[i];
            s.radius = B * radius;
        } else {
            s.kind = Shape::Kind::box;
            for (int i = 0; i < 4; ++i) {
                double a = sg * B * lo[i], b = sg * B * hi[i];
                s.lo[i] = std::min(a, b);
                s.hi[i] = std::max(a, b);
            }
        }
        out.push_back(s);
    }
    return out;
}

double WeightFunction::sup_norm() const {
    double m = 0;
    for (int i = 0; i < 4; ++i)
        m = kind == Kind::bump ? std::max(m, std::abs(center[i]) + radius)
                               : std::max({m, std::abs(lo[i]), std::abs(hi[i])});
    return m;
}

WeightFunction WeightFunction::scaled(double s) const {
    if (!(s > 0)) throw std::invalid_argument("weight: scale must be positive");
    WeightFunction w = *this;
    for (int i = 0; i < 4; ++i) {
        w.center[i] *= s;
        w.lo[i] *= s;
        w.hi[i] *= s;
    }
    w.radius *= s;
    return w;
}

WeightFunction WeightFunction::base() const {
    WeightFunction w = *this;
    w.symmetric = false;
    return w;
}

void enumerate_solutions(const QuadraticForm& F, const std::vector<Shape>& shapes,
                         const std::optional<CongruenceData>& cong, const EnumOptions& opt,
                         const std::function<void(const Vec4&)>& visit) {
    Setup S = make_setup(F, cong, opt.primitive);
    const int n_items = (int)shapes.size() * kChunks;
    std::vector<std::vector<Vec4>> found(n_items);
    run_items(n_items, opt.threads, [&](int item) {
        enumerate_chunk(S, shapes, (size_t)(item / kChunks), item % kChunks,
                        [&](const Vec4& x) { found[item].push_back(x); });
    });
    std::vector<Vec4> all;
    for (auto& v : found)
        for (auto& x : v) {
            visit(x);
            if (!opt.dump_path.empty()) all.push_back(x);
        }
    if (!opt.dump_path.empty()) write_dump(opt.dump_path, all);
}

std::vector<Vec4> read_dump(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open dump file " + path);
    std::vector<Vec4> out;
    unsigned char b[32];
    while (f.read((char*)b, 32)) {
        Vec4 x;
        for (int i = 0; i < 4; ++i) {
            u64 v = 0;
            for (int j = 0; j < 8; ++j) v |= (u64)b[8 * i + j] << (8 * j);
            x[i] = (i64)v;
        }
        out.push_back(x);
    }
    return out;
}

namespace {

CountResult count_impl(const QuadraticForm& F, const WeightFunction& w, double B, const CongruenceData& cong,
                       bool primitive, const EnumOptions& opt) {
    if (!(B >= 1)) throw std::invalid_argument("count: B must be at least 1");
    w.validate();
    Setup S = make_setup(F, cong, primitive);
    auto shapes = w.shapes(B);
    const int n_items = (int)shapes.size() * kChunks;
    std::vector<i64> cnt(n_items, 0);
    std::vector<double> sum(n_items, 0.0);
    std::vector<std::vector<Vec4>> pts(opt.dump_path.empty() ? 0 : n_items);
    run_items(n_items, opt.threads, [&](int item) {
        double s = 0, comp = 0;  // Kahan
        i64 c = 0;
        enumerate_chunk(S, shapes, (size_t)(item / kChunks), item % kChunks, [&](const Vec4& x) {
            ++c;
            double v = w(F, Vec4d{x[0] / B, x[1] / B, x[2] / B, x[3] / B});
            double y = v - comp, t = s + y;
            comp = (t - s) - y;
            s = t;
            if (!pts.empty()) pts[item].push_back(x);
        });
        cnt[item] = c;
        sum[item] = s;
    });
    CountResult r;
    for (int i = 0; i < n_items; ++i) {
        r.raw_count += cnt[i];
        r.weighted_sum += sum[i];
    }
    if (!opt.dump_path.empty()) {
        std::vector<Vec4> all;
        for (auto& v : pts) all.insert(all.end(), v.begin(), v.end());
        write_dump(opt.dump_path, all);
    }
    r.B = B;
    r.L = cong.L;
    r.Gamma = cong.Gamma;
    return r;
}

}  // namespace

CountResult count_W(const QuadraticForm& F, const WeightFunction& w, double B, const CongruenceData& cong,
                    const EnumOptions& opt) {
    auto r = count_impl(F, w, B, cong, false, opt);
    r.mode = CountResult::Mode::W;
    return r;
}

CountResult count_Wo(const QuadraticForm& F, const WeightFunction& w, double B, const CongruenceData& cong,
                     WoMode mode, const EnumOptions& opt) {
    if (mode == WoMode::direct) {
        auto r = count_impl(F, w, B, cong, true, opt);
        r.mode = CountResult::Mode::Wo;
        return r;
    }
    // Σ_d μ(d) 𝒩_𝒲(w(·d/B); (L, d̄Γ)); terms vanish once B/d < 1/|supp w|∞
    CountResult r;
    r.B = B;
    r.L = cong.L;
    r.Gamma = cong.Gamma;
    r.mode = CountResult::Mode::Wo;
    const i64 dmax = (i64)std::floor(B * w.sup_norm());
    EnumOptions o = opt;
    o.dump_path.clear();
    for (i64 d = 1; d <= dmax; ++d) {
        if (std::gcd(d, cong.L) != 1) continue;
        int mu = arith::mobius((u64)d);
        if (mu == 0) continue;
        double Bd = B / (double)d;
        if (Bd * w.sup_norm() < 1) continue;
        i64 dinv = cong.L == 1 ? 1 : arith::invmod(mod(d, cong.L), cong.L);
        auto cd = expsums::twist(F, cong, dinv);
        CountResult part;
        if (Bd >= 1) {
            part = count_impl(F, w, Bd, cd, false, o);
        } else {
            // count_impl requires B ≥ 1; rescale the weight instead
            part = count_impl(F, w.scaled(Bd), 1.0, cd, false, o);
        }
        r.raw_count += part.raw_count;
        r.weighted_sum += mu * part.weighted_sum;
    }
    return r;
}

CountResult count_V(const QuadraticForm& F, const WeightFunction& w, double B, const CongruenceData& cong,
                    const EnumOptions& opt) {
    if (!w.symmetric) throw std::invalid_argument("count_V: the weight must be symmetric");
    CountResult r;
    r.B = B;
    r.L = cong.L;
    r.Gamma = cong.Gamma;
    r.mode = CountResult::Mode::V;
    EnumOptions o = opt;
    o.dump_path.clear();
    for (i64 g = 1; g <= cong.L; ++g) {
        if (std::gcd(g, cong.L) != 1) continue;
        auto part = count_Wo(F, w, B, expsums::twist(F, cong, g), WoMode::direct, o);
        r.raw_count += part.raw_count;
        r.weighted_sum += part.weighted_sum;
    }
    r.weighted_sum /= 2;
    return r;
}

}  // namespace quadcone::lattice
