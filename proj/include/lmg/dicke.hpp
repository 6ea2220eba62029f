#pragma once
#include "lmg/params.hpp"

#include <Eigen/Dense>
#include <complex>

namespace lmg {

/// State in the maximal collective sector: amplitudes over |S=N/2, m>,
/// m = -N/2 .. N/2 stored ascending, amp[k] belongs to m = k - N/2.
struct DickeState {
    int N = 0;
    Eigen::VectorXcd amp;

    int dim() const { return N + 1; }
    double norm() const { return amp.norm(); }
};

/// Spin coherent state |theta, phi>: product of N single spins tipped by
/// theta from +z with azimuth phi, projected onto the Dicke ladder.
/// amp_m = sqrt(C(N, N/2+m)) cos(theta/2)^(N/2+m) sin(theta/2)^(N/2-m)
///         * exp(-i (N/2+m) phi)
/// Moments: <Sz> = (N/2)cos(theta), <Sx> = (N/2)sin(theta)cos(phi),
///          <Sy> = (N/2)sin(theta)sin(phi).
DickeState coherent_state(int N, double theta, double phi);

/// Basis state |m = k - N/2>.
DickeState basis_state(int N, int k);

} // namespace lmg
