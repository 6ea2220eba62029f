#pragma once
#include "lmg/dicke.hpp"

namespace lmg {

/// Hermitian operator on the Dicke ladder with at most one off diagonal.
/// anti = false: real symmetric, (O)_{k,k+1} = (O)_{k+1,k} = off[k].
/// anti = true:  (O)_{k,k+1} = +i off[k], (O)_{k+1,k} = -i off[k]  (Sy form).
struct CollectiveOperator {
    int N = 0;
    Eigen::VectorXd diag; // size N+1
    Eigen::VectorXd off;  // size N, couples k and k+1
    bool anti = false;

    int dim() const { return N + 1; }
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
    DickeState apply(const DickeState& st) const;

    /// max_k |diag_k| + |off_{k-1}| + |off_k|, encloses the spectrum.
    double gershgorin_radius() const;
};

CollectiveOperator spin_x(int N);
CollectiveOperator spin_y(int N);
CollectiveOperator spin_z(int N);

/// H = -(chi/N) Sz^2 - Omega Sx - omega Sz.
CollectiveOperator build_hamiltonian(const LmgParams& p);

/// Generator of the parametric perturbation: Sx (Transverse) or Sz (Longitudinal).
CollectiveOperator perturbation_operator(int N, PerturbationAxis axis);

/// y = O x into preallocated y. Serial reference kernel.
void apply_serial(const CollectiveOperator& op, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

/// Same contract with rows distributed over OpenMP threads. One writer per row,
/// no reductions, so the result is bitwise identical to apply_serial at any
/// thread count.
void apply_omp(const CollectiveOperator& op, const Eigen::VectorXcd& x, Eigen::VectorXcd& y);

double expectation(const CollectiveOperator& op, const DickeState& st);
double variance(const CollectiveOperator& op, const DickeState& st);

} // namespace lmg
