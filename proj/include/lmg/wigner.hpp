#pragma once
#include "lmg/dicke.hpp"

#include <vector>

namespace lmg {

/// One sampled point of the spin Wigner function in the polar disk
/// coordinates r = (1 + 2Sz/N)^{1/4} (south pole at the origin) and azimuth
/// phi, together with the sphere angle theta it came from.
struct WignerSample {
    double theta = 0.0;
    double phi = 0.0;
    double r = 0.0;
    double value = 0.0;
};

/// Multipole kernel for the spin Wigner function at fixed N: the rotated
/// quasi-probability is a diagonal quadratic form W(n) = sum_m kappa_m
/// |<m|R(n)^dag psi>|^2. kappa is assembled from the full spherical-tensor
/// expansion to rank N (the diagonal rank-k tensors are the orthonormal Gram
/// polynomials on the ladder), and the rank-0 term fixes the normalization
/// int W dOmega = 1.
struct WignerKernel {
    int N = 0;
    Eigen::VectorXd kappa;      // size N+1
    Eigen::MatrixXd x_vectors;  // eigenvectors of Sx, for e^{i theta Sy}
    Eigen::VectorXd x_levels;   // eigenvalues of Sx
};

WignerKernel make_wigner_kernel(int N);

/// W evaluated at one sphere direction.
double wigner_at(const WignerKernel& kernel, const DickeState& state,
                 double theta, double phi);
double wigner_at(const WignerKernel& kernel, const Eigen::MatrixXcd& rho,
                 double theta, double phi);

/// W over the outer product of the theta and phi grids, flattened with theta
/// outermost and remapped to the polar disk radius.
std::vector<WignerSample> wigner_polar_samples(const DickeState& state,
                                               const std::vector<double>& thetas,
                                               const std::vector<double>& phis);
std::vector<WignerSample> wigner_polar_samples(const Eigen::MatrixXcd& rho, int N,
                                               const std::vector<double>& thetas,
                                               const std::vector<double>& phis);

} // namespace lmg
