#pragma once
#include <vector>

namespace lmg {

/// J_0(x) .. J_nmax(x) for x >= 0 by downward (Miller) recurrence, normalized
/// with J_0 + 2 sum_k J_{2k} = 1. Relative accuracy ~1e-14 for the orders that
/// matter in a propagator expansion.
std::vector<double> bessel_jn_array(int n_max, double x);

} // namespace lmg
