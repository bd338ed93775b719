#pragma once

// The singular integral ℐ(w) = ∫ w δ(F) dx, i.e. the Leray measure of the cone
// weighted by w, by surface quadrature and by a thin-slab limit.

#include <stdexcept>
#include <vector>

#include "quadcone/lattice.hpp"

namespace quadcone::singint {

using lattice::WeightFunction;
using quadform::QuadraticForm;

class SingularSurfaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LerayResult {
    enum class Method { surface_quadrature, slab_limit };
    double value = 0;
    Method method = Method::surface_quadrature;
    double est_error = 0;
    i64 samples_or_nodes = 0;
    int coordinate = 3;            // the coordinate solved for
    bool converged = true;         // slab: extrapolation residuals decrease
    std::vector<double> raw;       // slab: the estimate at each ε before extrapolation
};

/// Coordinate with nonzero diagonal entry maximizing min |∂_kF|/|∇F| on the support.
int choose_coordinate(const QuadraticForm& F, const WeightFunction& w);

/// Midpoint rule on an n³ grid over the other three coordinates; the error is
/// the difference to the n/2 grid. coordinate < 0 picks one by choose_coordinate.
LerayResult leray_surface(const QuadraticForm& F, const WeightFunction& w, int grid = 64, int coordinate = -1);

/// (1/2ε)∫_{|F|<ε} w dx for each ε of a decreasing schedule (≥ 3 values),
/// extrapolated in ε². Jittered sampling over three coordinates, Gauss–Legendre
/// along the fourth.
LerayResult leray_slab(const QuadraticForm& F, const WeightFunction& w, const std::vector<double>& eps,
                       int samples = 1 << 18, u64 seed = 1);

}  // namespace quadcone::singint
