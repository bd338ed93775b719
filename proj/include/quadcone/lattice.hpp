#pragma once

// Enumeration of integral zeros of F in bounded regions and the weighted
// counting functions over congruence classes.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quadcone/expsums.hpp"

namespace quadcone::lattice {

using expsums::CongruenceData;
using quadform::QuadraticForm;

/// A ball or an axis-parallel box in R⁴.
struct Shape {
    enum class Kind { ball, box };
    Kind kind = Kind::ball;
    Vec4d lo{0, 0, 0, 0}, hi{0, 0, 0, 0};  // ball: lo is the center
    double radius = 0;

    bool contains(const Vec4d& x) const;
    double coord_min(int i) const { return kind == Kind::ball ? lo[i] - radius : lo[i]; }
    double coord_max(int i) const { return kind == Kind::ball ? lo[i] + radius : hi[i]; }
};

struct WeightFunction {
    enum class Kind { bump, box };
    Kind kind = Kind::bump;
    Vec4d center{0, 0, 0, 1};
    double radius = 0.9;
    Vec4d lo{0, 0, 0, 0}, hi{0, 0, 0, 0};
    int component = -1;  // -1: no restriction
    bool symmetric = false;

    static WeightFunction bump(const Vec4d& center, double radius, int component = -1, bool symmetric = false);
    static WeightFunction box(const Vec4d& lo, const Vec4d& hi, int component = -1, bool symmetric = false);

    /// throws std::invalid_argument if the support meets 0 or is empty
    void validate() const;
    /// w(u), u = x/B
    double operator()(const QuadraticForm& F, const Vec4d& u) const;
    /// the support of w(·/B) as a union of shapes
    std::vector<Shape> shapes(double B) const;
    /// max |u|∞ over the support
    double sup_norm() const;
    /// u ↦ w(u/s)
    WeightFunction scaled(double s) const;
    /// the non-symmetrized weight
    WeightFunction base() const;
};

struct EnumOptions {
    bool primitive = false;
    int threads = 1;
    std::string dump_path;  // little-endian i64 quadruples, enumeration order
};

/// Every integral zero of F in the union of shapes (each point once), x ≡ λ mod L
/// when cong is given, in a fixed order.
void enumerate_solutions(const QuadraticForm& F, const std::vector<Shape>& shapes,
                         const std::optional<CongruenceData>& cong, const EnumOptions& opt,
                         const std::function<void(const Vec4&)>& visit);

struct CountResult {
    enum class Mode { W, Wo, V };
    i64 raw_count = 0;
    double weighted_sum = 0;
    double B = 0;
    i64 L = 1;
    Vec4 Gamma{0, 0, 0, 0};
    Mode mode = Mode::W;
};

enum class WoMode { direct, moebius };

CountResult count_W(const QuadraticForm& F, const WeightFunction& w, double B, const CongruenceData& cong,
                    const EnumOptions& opt = {});
CountResult count_Wo(const QuadraticForm& F, const WeightFunction& w, double B, const CongruenceData& cong,
                     WoMode mode = WoMode::direct, const EnumOptions& opt = {});
/// (1/2) Σ_{γ ∈ (Z/L)^×} 𝒩_{𝒲^o}(w; (L, γΓ)); w must be symmetric.
CountResult count_V(const QuadraticForm& F, const WeightFunction& w, double B, const CongruenceData& cong,
                    const EnumOptions& opt = {});

/// Reads a dump written by enumerate_solutions.
std::vector<Vec4> read_dump(const std::string& path);

}  // namespace quadcone::lattice
