#pragma once
#include "lmg/operators.hpp"

#include <vector>

namespace lmg {

/// Energy window certified to contain the full spectrum of H.
struct SpectralBounds {
    double e_min = 0.0;
    double e_max = 0.0;

    double center() const { return 0.5 * (e_min + e_max); }
    double half_width() const { return 0.5 * (e_max - e_min); }
};

/// The model-parameter window (-N(chi+|omega|), +N(chi+|omega|)).
SpectralBounds spectral_bounds(const LmgParams& p);

/// Symmetric window from the Gershgorin radius with a 5% guard band.
/// Valid for any Hermitian tridiagonal operator.
SpectralBounds enclosing_bounds(const CollectiveOperator& H);

/// Tightest window among the certified candidates; what the drivers use.
SpectralBounds propagation_bounds(const LmgParams& p, const CollectiveOperator& H);

struct ChebyshevPlan {
    int n_cut = 0;
    SpectralBounds bounds;
    double norm_tolerance = 1e-10;
};

/// Plan sized for evolution up to |t| <= t_max with coefficient tails below
/// double rounding.
ChebyshevPlan make_plan(const SpectralBounds& bounds, double t_max);

/// exp(-iHt)|state> by Chebyshev expansion of the propagator. Symmetric bounds
/// make the window-shift phase vanish, so the result carries the exact global
/// phase (verified against eigenbasis propagation). Norm is certified after
/// every call.
DickeState chebyshev_evolve(const CollectiveOperator& H, const DickeState& state,
                            double t, const ChebyshevPlan& plan);

/// States at each requested time, sharing one polynomial-vector recursion.
/// Times must be ascending and of uniform sign.
std::vector<DickeState> evolve_grid(const CollectiveOperator& H, const DickeState& state,
                                    const std::vector<double>& times,
                                    const ChebyshevPlan& plan);

/// Bounds + plan + evolve in one call.
DickeState evolve(const CollectiveOperator& H, const LmgParams& p,
                  const DickeState& state, double t);

} // namespace lmg
