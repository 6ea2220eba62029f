#pragma once
#include "lmg/operators.hpp"

#include <utility>

namespace lmg {

/// Full eigendecomposition H = V diag(E) V^T of a symmetric tridiagonal operator.
struct SpectralDecomposition {
    LmgParams params;
    Eigen::VectorXd energies; // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns

    int dim() const { return static_cast<int>(energies.size()); }
};

SpectralDecomposition diagonalize(const CollectiveOperator& H, const LmgParams& p);
SpectralDecomposition diagonalize(const LmgParams& p);

/// exp(-iHt)|psi0> through the eigenbasis. Reference propagator for tests;
/// O(D^2) per call after the O(D^3) decomposition.
DickeState eigen_evolve(const SpectralDecomposition& dec, const DickeState& psi0, double t);

/// Diagonal matrix elements of Sx and Sz across the spectrum together with the
/// eigenbasis weights of a probe state. Energies are stored as densities E/N.
struct EqptProfile {
    int N = 0;
    Eigen::VectorXd e_over_n;  // E_nn/N, ascending
    Eigen::VectorXd sx_over_n; // <n|Sx|n>/N
    Eigen::VectorXd sz_over_n; // <n|Sz|n>/N
    Eigen::VectorXd weights;   // |c_n|^2 of the probe state
    double e_cr_over_n = 0.0;  // critical energy density -Omega/2
    double e0 = 0.0;           // <psi0|H|psi0>
    double de = 0.0;           // sqrt(<H^2>-<H>^2) of psi0
};

EqptProfile eqpt_profile(const SpectralDecomposition& dec, const DickeState& psi0);

std::pair<double, double> mean_energy_and_fluctuation(const DickeState& psi0,
                                                      const CollectiveOperator& H);

/// Power-law fit S(e)/N = A + B |e - e_cr|^gamma on one side of the critical energy.
struct EqptFit {
    double A = 0.0;
    double B = 0.0;
    double gamma = 0.0;
    double rms = 0.0;
    int n_points = 0;
};

/// Window spans window_multiplier times the probe-state energy fluctuation,
/// above e_cr for the transverse moment and below it for the longitudinal one
/// (which is folded to |Sz| to merge the two wells).
EqptFit fit_eqpt_exponent(const EqptProfile& profile, PerturbationAxis axis,
                          int window_multiplier);

/// Fit of y = A + B u^gamma over explicit samples; exposed for synthetic-data tests.
EqptFit fit_power_law(const Eigen::VectorXd& u, const Eigen::VectorXd& y);

double predicted_qfi_scaling(double gamma);

} // namespace lmg
