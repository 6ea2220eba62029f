#pragma once
#include "lmg/echo.hpp"
#include "lmg/operators.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace lmg {

/// Permutation-invariant N-qubit density matrix. One (2j+1)x(2j+1) block per
/// total-spin sector j = N/2, N/2-1, ..., stored per degenerate copy, so the
/// physical trace is sum_j d_j tr rho^(j) with multiplicity
/// d_j = C(N, N/2-j) - C(N, N/2-j-1). Storage is O(N^3) against 4^N dense.
struct BlockDensityMatrix {
    int N = 0;
    std::vector<Eigen::MatrixXcd> blocks; // blocks[b] holds sector j = N/2 - b

    int block_count() const { return static_cast<int>(blocks.size()); }
    double j_of(int b) const { return 0.5 * N - b; }
    int dim_of(int b) const { return N + 1 - 2 * b; }
    double degeneracy(int b) const;
    double trace() const;
    std::size_t stored_entries() const;
};

BlockDensityMatrix block_zero(int N);

/// Pure states on the Dicke ladder are fully symmetric: top block only.
BlockDensityMatrix block_from_pure(const DickeState& psi);

enum class Moment { Sx, Sy, Sz, Sx2, Sy2, Sz2 };

/// Tr(rho O) with the degeneracy weights folded in.
double collective_moment(const BlockDensityMatrix& rho, Moment which);

struct LindbladStepper {
    LmgParams params;
    double gamma = 0.0; // single-particle dephasing rate
    double dt = 0.0;
    int order = 4; // classical Runge-Kutta
    /// Evolve under -H instead of H (echo backward arm); the dissipator is
    /// unaffected.
    bool reverse_hamiltonian = false;
};

/// dt saturates the stability budget dt (||H|| + Gamma N) <= budget <= 0.1.
LindbladStepper make_lindblad_stepper(const LmgParams& p, double gamma,
                                      double budget = 0.1);

/// drho/dt = -i[H, rho] + (Gamma/4) sum_n (sigma_z^n rho sigma_z^n - rho)
/// reduced to the block basis; the dephasing part couples j to j+-1.
void lindblad_rhs_serial(const LindbladStepper& stepper,
                         const BlockDensityMatrix& rho, BlockDensityMatrix& out);

/// Same contract with blocks distributed over OpenMP threads. Each output
/// block has a single writer, so the result is bitwise identical to the
/// serial kernel at any thread count.
void lindblad_rhs_omp(const LindbladStepper& stepper,
                      const BlockDensityMatrix& rho, BlockDensityMatrix& out);

BlockDensityMatrix lindblad_evolve(const LindbladStepper& stepper,
                                   const BlockDensityMatrix& rho0, double t);

struct OpenEchoSpec {
    LmgParams params;
    double gamma = 0.0;
    PerturbationAxis axis = PerturbationAxis::Longitudinal;
    double delta = 0.0;
    double t = 0.0;
    /// The echo reverses the Hamiltonian only; dephasing keeps acting forward
    /// in both arms. Scale factor on Gamma during the backward arm.
    double backward_gamma_scale = 1.0;
    /// dt (||H|| + Gamma N) <= step_budget; 0 picks a budget that keeps RK4
    /// positivity dust under the -1e-8 gate for the run length.
    double step_budget = 0.0;
};

BlockDensityMatrix open_echo_final_state(const OpenEchoSpec& spec,
                                         const DickeState& psi0);

/// Same finite-difference contract as observable_sensitivity, evaluated on
/// block density matrices. observable must be a first moment (Sx, Sy, Sz).
SensitivityResult open_echo_sensitivity(const OpenEchoSpec& spec,
                                        const DickeState& psi0, Moment observable,
                                        const std::string& label, double h = 0.0);

/// Time average of Tr(rho(t) S_z) over [0, T].
double open_order_parameter(const LmgParams& p, double gamma,
                            const DickeState& psi0, double T);

} // namespace lmg
