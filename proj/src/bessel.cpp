#include "lmg/bessel.hpp"
#include "lmg/errors.hpp"

#include <cmath>

namespace lmg {

std::vector<double> bessel_jn_array(int n_max, double x) {
    if (n_max < 0) throw InvalidParams("bessel order must be >= 0");
    if (!(x >= 0.0)) throw InvalidParams("bessel argument must be >= 0");

    std::vector<double> j(n_max + 1, 0.0);
    if (x < 1e-8) {
        j[0] = 1.0 - 0.25 * x * x;
        if (n_max >= 1) j[1] = 0.5 * x;
        // orders >= 2 are below 1e-17 here
        return j;
    }

    // start far enough above the turning point that the downward recurrence
    // has converged onto the minimal solution by the time it reaches n_max
    const int n_start =
        std::max(n_max, static_cast<int>(std::ceil(x + 85.0 * std::cbrt(x)))) + 40;

    double jp = 0.0;    // J_{n+1}, unnormalized
    double jc = 1e-300; // J_n at n = n_start
    double norm = (n_start % 2 == 0) ? 2.0 * jc : 0.0;
    for (int n = n_start; n >= 1; --n) {
        double jm = (2.0 * n / x) * jc - jp;
        jp = jc;
        jc = jm;
        const int idx = n - 1;
        if (std::abs(jc) > 1e250) { // rescale before overflow
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for (int k = idx + 1; k <= n_max; ++k) j[k] *= 1e-250;
        }
        if (idx <= n_max) j[idx] = jc;
        if (idx == 0)
            norm += jc;
        else if (idx % 2 == 0)
            norm += 2.0 * jc;
    }

    const double inv = 1.0 / norm;
    for (double& v : j) v *= inv;
    return j;
}

} // namespace lmg
