#include "lmg/spectrum.hpp"
#include "lmg/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace lmg {

SpectralDecomposition diagonalize(const CollectiveOperator& H, const LmgParams& p) {
    if (H.anti)
        throw InvalidParams("eigensolver requires a real symmetric operator");
    const int D = H.dim();
    SpectralDecomposition dec;
    dec.params = p;
    dec.energies = H.diag;
    Eigen::VectorXd sub = H.off; // destroyed by the solver
    dec.vectors.resize(D, D);
    const lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', D,
                                           dec.energies.data(), sub.data(),
                                           dec.vectors.data(), D);
    if (info != 0)
        throw ConvergenceFailure("dstevd info=" + std::to_string(info));
    return dec;
}

SpectralDecomposition diagonalize(const LmgParams& p) {
    return diagonalize(build_hamiltonian(p), p);
}

DickeState eigen_evolve(const SpectralDecomposition& dec, const DickeState& psi0, double t) {
    if (psi0.dim() != dec.dim())
        throw DimensionMismatch("decomposition dim vs state dim");
    Eigen::VectorXcd c = dec.vectors.transpose() * psi0.amp;
    for (int n = 0; n < dec.dim(); ++n)
        c[n] *= std::exp(std::complex<double>(0.0, -dec.energies[n] * t));
    return DickeState{psi0.N, dec.vectors * c};
}

EqptProfile eqpt_profile(const SpectralDecomposition& dec, const DickeState& psi0) {
    const LmgParams& p = dec.params;
    const int D = dec.dim();
    if (psi0.dim() != D)
        throw DimensionMismatch("profile probe state dim");

    EqptProfile prof;
    prof.N = p.N;
    prof.e_over_n = dec.energies / p.N;
    prof.sx_over_n.resize(D);
    prof.sz_over_n.resize(D);

    const Eigen::VectorXd b = spin_x(p.N).off; // ladder elements
    const double S = 0.5 * p.N;
    for (int n = 0; n < D; ++n) {
        const auto v = dec.vectors.col(n);
        double sx = 0.0, sz = 0.0;
        for (int k = 0; k + 1 < D; ++k) sx += b[k] * v[k] * v[k + 1];
        sx *= 2.0;
        for (int k = 0; k < D; ++k) sz += (k - S) * v[k] * v[k];
        prof.sx_over_n[n] = sx / p.N;
        prof.sz_over_n[n] = sz / p.N;
    }

    const Eigen::VectorXcd c = dec.vectors.transpose() * psi0.amp;
    prof.weights = c.cwiseAbs2();

    prof.e_cr_over_n = -0.5 * p.Omega;
    const auto [e0, de] = mean_energy_and_fluctuation(psi0, build_hamiltonian(p));
    prof.e0 = e0;
    prof.de = de;
    return prof;
}

std::pair<double, double> mean_energy_and_fluctuation(const DickeState& psi0,
                                                      const CollectiveOperator& H) {
    const double e0 = expectation(H, psi0);
    const double var = variance(H, psi0);
    return {e0, std::sqrt(std::max(0.0, var))};
}

namespace {

// Weighted LS for y = A + B u^gamma at fixed gamma, weight u^-wpow; returns
// the weighted rms.
double power_ls(const Eigen::VectorXd& u, const Eigen::VectorXd& y, double gamma,
                double wpow, double& A, double& B) {
    const int n = static_cast<int>(u.size());
    double sw = 0.0, sf = 0.0, sff = 0.0, sy = 0.0, sfy = 0.0;
    Eigen::VectorXd f(n), wv(n);
    for (int i = 0; i < n; ++i) {
        f[i] = std::pow(u[i], gamma);
        wv[i] = wpow == 0.0 ? 1.0 : std::pow(u[i], -wpow);
        sw += wv[i];
        sf += wv[i] * f[i];
        sff += wv[i] * f[i] * f[i];
        sy += wv[i] * y[i];
        sfy += wv[i] * f[i] * y[i];
    }
    const double det = sw * sff - sf * sf;
    if (std::abs(det) < 1e-300) {
        A = sy / sw;
        B = 0.0;
    } else {
        A = (sy * sff - sf * sfy) / det;
        B = (sw * sfy - sf * sy) / det;
    }
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - A - B * f[i];
        ss += wv[i] * r * r;
    }
    return std::sqrt(ss / sw);
}

EqptFit power_fit(const Eigen::VectorXd& u, const Eigen::VectorXd& y, double wpow) {
    if (u.size() != y.size())
        throw DimensionMismatch("power-law sample arrays");
    if (u.size() < 3)
        throw InsufficientPoints("power-law fit needs >= 3 samples, got " +
                                 std::to_string(u.size()));

    double best_g = 0.5, best_rms = std::numeric_limits<double>::infinity();
    double A = 0.0, B = 0.0;
    for (int i = 1; i <= 50; ++i) {
        const double g = 0.02 * i;
        const double r = power_ls(u, y, g, wpow, A, B);
        if (r < best_rms) {
            best_rms = r;
            best_g = g;
        }
    }

    // golden-section refinement around the grid winner
    double lo = std::max(1e-3, best_g - 0.02), hi = std::min(1.0, best_g + 0.02);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = power_ls(u, y, x1, wpow, A, B), f2 = power_ls(u, y, x2, wpow, A, B);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = power_ls(u, y, x1, wpow, A, B);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = power_ls(u, y, x2, wpow, A, B);
        }
    }

    EqptFit fit;
    fit.gamma = 0.5 * (lo + hi);
    fit.rms = power_ls(u, y, fit.gamma, wpow, fit.A, fit.B);
    fit.n_points = static_cast<int>(u.size());
    return fit;
}

} // namespace

EqptFit fit_power_law(const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    return power_fit(u, y, 0.0);
}

EqptFit fit_eqpt_exponent(const EqptProfile& profile, PerturbationAxis axis,
                          int window_multiplier) {
    if (window_multiplier < 1)
        throw InvalidParams("window multiplier must be >= 1");
    const double w = window_multiplier * profile.de / profile.N;
    const double ec = profile.e_cr_over_n;
    const bool above = axis == PerturbationAxis::Transverse;

    // raw window points; |Sz| folds the two symmetry-broken branches onto one curve
    std::vector<double> us, ys;
    const int D = static_cast<int>(profile.e_over_n.size());
    for (int n = 0; n < D; ++n) {
        const double e = profile.e_over_n[n];
        const double u = above ? e - ec : ec - e;
        if (u >= 0.0 && u <= w) {
            us.push_back(u);
            ys.push_back(above ? profile.sx_over_n[n]
                               : std::abs(profile.sz_over_n[n]));
        }
    }
    if (us.size() < 20)
        throw InsufficientPoints("fit window holds " + std::to_string(us.size()) +
                                 " states, need >= 20");

    // median level spacing among the states nearest the critical energy
    std::vector<double> sorted = us;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> gaps;
    for (size_t i = 1; i < std::min<size_t>(sorted.size(), 21); ++i)
        gaps.push_back(sorted[i] - sorted[i - 1]);
    std::sort(gaps.begin(), gaps.end());
    const double spacing = gaps[gaps.size() / 2];

    // States within a few level spacings of the critical energy hybridize
    // across the separatrix and fall off the branch curve; drop them. The
    // u^-3.5 weight then pins the fit to the asymptotic region independently
    // of the window size (the finite-size cusp carries log corrections, so an
    // unweighted fit would measure a window-dependent effective exponent).
    std::vector<double> uk, yk;
    for (size_t i = 0; i < us.size(); ++i) {
        if (us[i] >= 5.0 * spacing) {
            uk.push_back(us[i]);
            yk.push_back(ys[i]);
        }
    }
    Eigen::VectorXd u = Eigen::Map<Eigen::VectorXd>(uk.data(), uk.size());
    Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(yk.data(), yk.size());
    return power_fit(u, y, 3.5);
}

double predicted_qfi_scaling(double gamma) {
    if (!(gamma > 0.0 && gamma < 2.0))
        throw InvalidParams("scaling prediction needs gamma in (0,2)");
    return 2.0 - gamma;
}

} // namespace lmg
