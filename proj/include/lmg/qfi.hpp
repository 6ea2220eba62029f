#pragma once
#include "lmg/spectrum.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace lmg {

enum class QfiMethod { EchoFD, ExactEigen, Secular, ShortTime };

const char* method_name(QfiMethod m);

struct QfiResult {
    double value = 0.0;      // F_Q
    double normalized = 0.0; // F_Q/(N t^2)
    QfiMethod method = QfiMethod::ExactEigen;
    std::map<std::string, double> diagnostics;
};

/// |<psi(lambda,t)|psi(lambda+delta,t)>| from two independent propagations.
/// The perturbed Hamiltonian shifts Omega (Transverse) or omega (Longitudinal).
double loschmidt_echo(const LmgParams& p, double delta, PerturbationAxis axis,
                      double t, const DickeState& psi0);

/// Curvature of the echo at delta=0 with an adaptive step: delta is rescaled
/// until the infidelity lands in [1e-8, 1e-2], then the delta/2 Richardson
/// estimate is reported and must agree with the delta one to 1%.
QfiResult qfi_finite_difference(const LmgParams& p, PerturbationAxis axis, double t,
                                const DickeState& psi0);

/// Time-averaged perturbation generator contracted in the eigenbasis:
/// reusable across times at fixed decomposition/axis/state. Building it costs
/// one dense O(D^3) transform; each evaluation is O(D^2).
struct EigenQfiContext {
    int N = 0;
    Eigen::VectorXd energies;
    Eigen::MatrixXd h1; // perturbation operator in the eigenbasis
    Eigen::VectorXcd c; // initial state in the eigenbasis

    double qfi_at(double t) const;
    /// Coefficient of 4t^2 in the long-time (secular) limit.
    double secular_coefficient() const;
};

EigenQfiContext make_eigen_qfi_context(const SpectralDecomposition& dec,
                                       PerturbationAxis axis, const DickeState& psi0);

/// w = G(t) c for the time-averaged generator G with matrix elements
/// h1_nm e^{i(E_n-E_m)t/2} sinc((E_n-E_m)t/2). Serial reference kernel and an
/// OpenMP row-parallel variant with bitwise-identical output.
void timeavg_generator_apply_serial(const Eigen::VectorXd& energies,
                                    const Eigen::MatrixXd& h1, double t,
                                    const Eigen::VectorXcd& c, Eigen::VectorXcd& w);
void timeavg_generator_apply_omp(const Eigen::VectorXd& energies,
                                 const Eigen::MatrixXd& h1, double t,
                                 const Eigen::VectorXcd& c, Eigen::VectorXcd& w);

QfiResult qfi_exact_eigenbasis(const SpectralDecomposition& dec, PerturbationAxis axis,
                               double t, const DickeState& psi0);

struct SecularCoefficient {
    double value = 0.0;           // F^sec(t) = 4 t^2 * value
    bool degenerate_warning = false; // some gap below 1e-10 of the spectral span
};

/// O(D^2): diagonal matrix elements of the perturbation against the weights of
/// psi0, no dense transform.
SecularCoefficient qfi_secular(const SpectralDecomposition& dec, PerturbationAxis axis,
                               const DickeState& psi0);

/// Analytic short-time laws for the theta=pi initial state.
QfiResult qfi_short_time(const LmgParams& p, PerturbationAxis axis, double t);

enum class SweptField { TransverseField, LongitudinalField };

struct PeakResult {
    double location = 0.0; // refined field value at the peak
    double value = 0.0;    // F_Q there
    int grid_index = 0;    // argmax on the grid
    std::vector<int> local_max_indices;
};

/// Evaluates eval on an ascending grid, finds interior local maxima, and
/// refines the strongest one with a three-point parabola through its grid
/// neighbors (vertex kept only if it beats the grid point). Throws NoPeak
/// on monotone data.
PeakResult refine_peak(const std::vector<double>& grid,
                       const std::function<double(double)>& eval);

/// Scans F_Q over a field grid and refines the global peak with a three-point
/// parabola through the neighboring grid points.
PeakResult find_critical_field(const LmgParams& base, PerturbationAxis axis,
                               SweptField swept, double t, const DickeState& psi0,
                               const std::vector<double>& grid, QfiMethod method);

struct PowerFit {
    double a = 0.0;
    double b = 0.0;
    double rms = 0.0;
};

/// Least squares of value = a N^b on log-log axes.
PowerFit scaling_fit(const std::vector<std::pair<double, double>>& points);

} // namespace lmg
