#pragma once
#include "lmg/params.hpp"

#include <Eigen/Dense>
#include <vector>

namespace lmg {

/// Reduced collective spin S/(N/2) on the unit sphere.
struct BlochVector {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    double norm() const { return std::sqrt(sx * sx + sy * sy + sz * sz); }
};

/// Classical trajectory of the reduced spin under the self-consistent field
/// (-Omega, 0, -chi sz - omega). energy is the conserved total E in full units.
struct Trajectory {
    LmgParams params;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<BlochVector> samples;
    double energy = 0.0;
};

/// E/N of the tipped coherent state:
/// E = -(N/2)[(chi/2)cos^2(theta) + Omega sin(theta)cos(phi) + omega cos(theta)]
double initial_energy_per_spin(double theta, double phi, const LmgParams& p);

double energy_per_spin(const BlochVector& u, const LmgParams& p);

/// Quartic potential governing the equivalent particle problem
/// (1/2)(dSz/dt)^2 + V_eff(Sz) = 0; sz and E in full units.
double effective_potential(double sz, const LmgParams& p, double E);

/// Both branches of the zero-longitudinal-field critical transverse field,
/// in units of chi: +-0.5 cos^2(theta) / (1 -+ sin(theta)cos(phi)).
/// A branch whose denominator vanishes is flagged invalid.
struct CriticalFieldPair {
    double plus = 0.0;
    double minus = 0.0;
    bool plus_valid = true;
    bool minus_valid = true;
};
CriticalFieldPair critical_field_analytic(double theta, double phi);

/// Closed form for the fully inverted (or fully aligned) state as a function
/// of the longitudinal field. Real only for omega/chi > -1/8; below that the
/// transition smooths into a crossover and CrossoverRegime is thrown.
double critical_field_longitudinal(double omega, double chi = 1.0);

/// Barrier-top condition: interior maximum sz* of V_eff with V_eff(sz*) = 0,
/// bisected over Omega to 1e-8 relative. Throws NoBarrier in the crossover
/// regime where the wells merge before the turning point reaches the top.
double phase_boundary_numeric(double theta, double phi, double omega,
                              const LmgParams& p);

/// True when V_eff at the current parameters has an interior barrier that
/// exceeds the (zero) mechanical energy of the particle.
bool barrier_blocks(double theta, double phi, const LmgParams& p);

/// Fourth-order fixed-step integration of u' = B x u,
/// B = (-Omega, 0, -chi u_z - omega). Requires dt <= 0.01/max(Omega,chi,|omega|).
Trajectory bloch_evolve(double theta, double phi, const LmgParams& p, double T,
                        double dt);

/// Trapezoidal average of S_z over [0, T], full units.
double time_averaged_sz(const Trajectory& traj, double T);

/// |time-averaged S_z| / (N/2) > 0.05 marks the ordered phase.
/// T defaults to 1e3/chi when negative.
bool ordered_phase(double theta, double phi, const LmgParams& p, double T = -1.0);

struct MeanfieldQfi {
    double value = 0.0;        ///< classical-limit F_Q
    double integral_sq = 0.0;  ///< squared norm of the frame-row time integral
    Eigen::Vector3d n_alpha = Eigen::Vector3d::Zero();
    double frame_error = 0.0;  ///< worst deviation of the frame from a rotation
    double energy_drift = 0.0; ///< relative drift of the conserved energy
};

/// Classical-limit sensitivity: the Heisenberg probe direction is carried by a
/// co-integrated frame rotation, its time integral I gives
///   F = |I|^2 N [1 - (n_alpha . n_psi)^2],  n_alpha = I/|I|,
/// which never exceeds N t^2.
MeanfieldQfi meanfield_qfi_detail(double theta, double phi, const LmgParams& p,
                                  double t, PerturbationAxis axis);
double meanfield_qfi(double theta, double phi, const LmgParams& p, double t,
                     PerturbationAxis axis);

} // namespace lmg
