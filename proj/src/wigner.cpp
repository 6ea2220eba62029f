#include "lmg/wigner.hpp"

#include "lmg/errors.hpp"
#include "lmg/operators.hpp"

#include <cmath>
#include <complex>
#include <functional>

#include <lapacke.h>

namespace lmg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Diagonal multipole weights: kappa_m = sqrt(2S+1)/(4 pi) sum_k sqrt(2k+1)
// p_k(m), where p_k are the orthonormal Gram polynomials on the ladder points
// m = -S..S (the diagonals of the rank-k spherical tensors). Their upward
// recurrence is violently unstable near the ladder endpoints, but the value
// table p_k(m) is exactly the eigenvector matrix of the polynomials' Jacobi
// operator (the nodes are the measure's atoms), so a tridiagonal
// diagonalization delivers all values orthogonally.
Eigen::VectorXd multipole_weights(int N) {
    const int D = N + 1;
    const double n = D;
    Eigen::VectorXd nodes = Eigen::VectorXd::Zero(D);
    Eigen::VectorXd sub(N);
    for (int k = 1; k <= N; ++k)
        sub[k - 1] = 0.5 * k * std::sqrt((n * n - k * k) / (4.0 * k * k - 1.0));
    Eigen::MatrixXd table(D, D); // (k, node) entries p_k(m)
    const lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', D, nodes.data(),
                                           sub.data(), table.data(), D);
    if (info != 0)
        throw ConvergenceFailure("dstevd info=" + std::to_string(info));
    Eigen::VectorXd weight(D);
    for (int k = 0; k < D; ++k) weight[k] = std::sqrt(2.0 * k + 1.0);
    Eigen::VectorXd kappa(D);
    for (int j = 0; j < D; ++j) {
        // eigenvector sign fixed by p_0 = +1/sqrt(n); columns are ascending
        // in the eigenvalue, which is the node m = j - S
        const double sign = table(0, j) < 0.0 ? -1.0 : 1.0;
        kappa[j] = sign * weight.dot(table.col(j));
    }
    return kappa * (std::sqrt(n) / (4.0 * kPi));
}

// psi -> e^{i theta Sy} e^{i phi Sz} psi, the frame in which the sampled
// direction sits at the north pole. e^{i theta Sy} is conjugated through the
// Sx eigenbasis by the z-quarter-turn phases.
Eigen::VectorXcd rotate_to(const WignerKernel& kernel, const Eigen::VectorXcd& amp,
                           double theta, double phi) {
    const int D = kernel.N + 1;
    const double S = 0.5 * kernel.N;
    Eigen::VectorXcd v(D);
    for (int i = 0; i < D; ++i) {
        const double m = i - S;
        v[i] = amp[i] * std::polar(1.0, (phi + 0.5 * kPi) * m);
    }
    Eigen::VectorXcd y = kernel.x_vectors.transpose() * v;
    for (int j = 0; j < D; ++j) y[j] *= std::polar(1.0, theta * kernel.x_levels[j]);
    v.noalias() = kernel.x_vectors * y;
    for (int i = 0; i < D; ++i) v[i] *= std::polar(1.0, -0.5 * kPi * (i - S));
    return v;
}

} // namespace

WignerKernel make_wigner_kernel(int N) {
    if (N < 1) throw InvalidParams("need at least one spin");
    WignerKernel kernel;
    kernel.N = N;
    kernel.kappa = multipole_weights(N);

    const int D = N + 1;
    const CollectiveOperator sx = spin_x(N);
    kernel.x_levels = Eigen::VectorXd::Zero(D);
    Eigen::VectorXd sub = sx.off;
    kernel.x_vectors.resize(D, D);
    const lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', D,
                                           kernel.x_levels.data(), sub.data(),
                                           kernel.x_vectors.data(), D);
    if (info != 0)
        throw ConvergenceFailure("dstevd info=" + std::to_string(info));
    return kernel;
}

double wigner_at(const WignerKernel& kernel, const DickeState& state,
                 double theta, double phi) {
    if (state.dim() != kernel.N + 1)
        throw DimensionMismatch("kernel N vs state dim");
    const Eigen::VectorXcd v = rotate_to(kernel, state.amp, theta, phi);
    return kernel.kappa.dot(v.cwiseAbs2());
}

double wigner_at(const WignerKernel& kernel, const Eigen::MatrixXcd& rho,
                 double theta, double phi) {
    const int D = kernel.N + 1;
    if (rho.rows() != D || rho.cols() != D)
        throw DimensionMismatch("kernel N vs density matrix dim");
    // columns of the rotation U itself, then <m|U rho U^dag|m> = c^dag rho c
    // with c the conjugated m-th row of U
    Eigen::MatrixXcd u(D, D);
    for (int j = 0; j < D; ++j) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(D);
        e[j] = 1.0;
        u.col(j) = rotate_to(kernel, e, theta, phi);
    }
    double w = 0.0;
    for (int m = 0; m < D; ++m) {
        const Eigen::VectorXcd c = u.row(m).conjugate().transpose();
        w += kernel.kappa[m] * std::real(c.dot(rho * c));
    }
    return w;
}

namespace {

std::vector<WignerSample> sample_grid(const WignerKernel& kernel,
                                      const std::vector<double>& thetas,
                                      const std::vector<double>& phis,
                                      const std::function<double(double, double)>& w) {
    std::vector<WignerSample> out;
    out.reserve(thetas.size() * phis.size());
    for (double theta : thetas) {
        const double r = std::pow(std::max(0.0, 1.0 + std::cos(theta)), 0.25);
        for (double phi : phis) out.push_back({theta, phi, r, w(theta, phi)});
    }
    return out;
}

} // namespace

std::vector<WignerSample> wigner_polar_samples(const DickeState& state,
                                               const std::vector<double>& thetas,
                                               const std::vector<double>& phis) {
    const WignerKernel kernel = make_wigner_kernel(state.N);
    return sample_grid(kernel, thetas, phis, [&](double t, double p) {
        return wigner_at(kernel, state, t, p);
    });
}

std::vector<WignerSample> wigner_polar_samples(const Eigen::MatrixXcd& rho, int N,
                                               const std::vector<double>& thetas,
                                               const std::vector<double>& phis) {
    const WignerKernel kernel = make_wigner_kernel(N);
    return sample_grid(kernel, thetas, phis, [&](double t, double p) {
        return wigner_at(kernel, rho, t, p);
    });
}

} // namespace lmg
