#pragma once
#include "lmg/errors.hpp"

#include <cmath>

namespace lmg {

/// Parameters of the collective-spin Hamiltonian
///   H = -(chi/N) Sz^2 - Omega Sx - omega Sz
/// restricted to the maximal-spin sector S = N/2 (dimension N+1).
struct LmgParams {
    int N = 100;        ///< number of spins
    double chi = 1.0;   ///< one-axis twisting strength, canonical energy scale
    double Omega = 0.5; ///< transverse field
    double omega = 0.0; ///< longitudinal field

    int dim() const { return N + 1; }

    void validate() const {
        if (N < 1) throw InvalidParams("N must be >= 1");
        // chi = 0 is admitted for free-spin reference runs (SQL baselines).
        if (!(chi >= 0.0) || !std::isfinite(chi))
            throw InvalidParams("chi must be finite and >= 0");
        if (!std::isfinite(Omega) || !std::isfinite(omega))
            throw InvalidParams("fields must be finite");
    }
};

/// Axis of the parametric perturbation probed by the QFI / echo protocols.
/// Transverse couples via Sx (field Omega), Longitudinal via Sz (field omega).
enum class PerturbationAxis { Transverse, Longitudinal };

inline const char* axis_name(PerturbationAxis a) {
    return a == PerturbationAxis::Transverse ? "x" : "z";
}

} // namespace lmg
