#pragma once
#include "lmg/params.hpp"

#include <vector>

namespace lmg {

struct CollectiveMoments {
    double t = 0.0;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    double sx2 = 0.0, sy2 = 0.0, sz2 = 0.0;
    double trace_error = 0.0;
};

/// Dense 4^N master-equation integration (N <= 6) for validating the block
/// solver: full 2^N Hilbert space, single-particle dephasing at rate gamma,
/// product initial state with every spin tipped by (theta, phi). Returns the
/// collective first and second moments at the requested times (ascending).
std::vector<CollectiveMoments> brute_force_master_equation(
    const LmgParams& p, double gamma, double theta, double phi,
    const std::vector<double>& times, double step_budget = 0.005);

} // namespace lmg
