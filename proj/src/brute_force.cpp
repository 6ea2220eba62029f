#include "lmg/brute_force.hpp"

#include "lmg/errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>

namespace lmg {
namespace {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Collective spin component as a dense 2^N matrix; bit n set means spin n up.
Matrix collective_dense(int N, int axis) {
    const int D = 1 << N;
    Matrix M = Matrix::Zero(D, D);
    for (int x = 0; x < D; ++x) {
        if (axis == 2) {
            M(x, x) = 0.5 * (2 * std::popcount(static_cast<unsigned>(x)) - N);
            continue;
        }
        for (int n = 0; n < N; ++n) {
            const int y = x ^ (1 << n);
            if (axis == 0) {
                M(y, x) += 0.5;
            } else {
                // sigma_y |up> = i |down>, sigma_y |down> = -i |up>
                const bool up = x & (1 << n);
                M(y, x) += up ? Complex(0.0, 0.5) : Complex(0.0, -0.5);
            }
        }
    }
    return M;
}

} // namespace

std::vector<CollectiveMoments> brute_force_master_equation(
    const LmgParams& p, double gamma, double theta, double phi,
    const std::vector<double>& times, double step_budget) {
    if (p.N < 1 || p.N > 6)
        throw InvalidParams("dense master equation is limited to 1 <= N <= 6");
    if (gamma < 0.0) throw InvalidParams("dephasing rate must be >= 0");
    if (!(step_budget > 0.0) || step_budget > 0.1 + 1e-12)
        throw InvalidParams("step budget must lie in (0, 0.1]");
    if (!std::is_sorted(times.begin(), times.end()) ||
        (!times.empty() && times.front() < 0.0))
        throw InvalidParams("sample times must be ascending and non-negative");

    const int N = p.N;
    const int D = 1 << N;
    const Matrix sx = collective_dense(N, 0);
    const Matrix sy = collective_dense(N, 1);
    const Matrix sz = collective_dense(N, 2);
    const Matrix sx2 = sx * sx, sy2 = sy * sy, sz2 = sz * sz;
    const Matrix H = -(p.chi / N) * sz2 - p.Omega * sx - p.omega * sz;

    // local dephasing acts elementwise: sum_n z_n(x) z_n(y) counts agreeing
    // bits, so the sandwich minus N gives -2 Gamma/4 * hamming(x, y)
    Eigen::MatrixXd W(D, D);
    for (int x = 0; x < D; ++x)
        for (int y = 0; y < D; ++y)
            W(x, y) = -0.5 * gamma *
                      std::popcount(static_cast<unsigned>(x ^ y));

    Eigen::VectorXcd psi(D);
    const Complex a = std::polar(std::cos(0.5 * theta), -phi);
    const double b = std::sin(0.5 * theta);
    for (int x = 0; x < D; ++x) {
        Complex amp(1.0, 0.0);
        for (int n = 0; n < N; ++n) amp *= (x & (1 << n)) ? a : Complex(b, 0.0);
        psi[x] = amp;
    }
    Matrix rho = psi * psi.adjoint();

    double hnorm = 0.0;
    for (int r = 0; r < D; ++r) hnorm = std::max(hnorm, H.row(r).cwiseAbs().sum());
    const double dt_max = step_budget / std::max(hnorm + gamma * N, 1e-12);

    auto rhs = [&](const Matrix& r) -> Matrix {
        return Complex(0.0, -1.0) * (H * r - r * H) + W.cwiseProduct(r);
    };
    auto sample = [&](double t) {
        CollectiveMoments mom;
        mom.t = t;
        mom.sx = (sx * rho).trace().real();
        mom.sy = (sy * rho).trace().real();
        mom.sz = (sz * rho).trace().real();
        mom.sx2 = (sx2 * rho).trace().real();
        mom.sy2 = (sy2 * rho).trace().real();
        mom.sz2 = (sz2 * rho).trace().real();
        mom.trace_error = std::abs(rho.trace().real() - 1.0) +
                          std::abs(rho.trace().imag());
        return mom;
    };

    std::vector<CollectiveMoments> out;
    out.reserve(times.size());
    double now = 0.0;
    for (double target : times) {
        const double span = target - now;
        if (span > 0.0) {
            const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-12)));
            const double dt = span / steps;
            for (int s = 0; s < steps; ++s) {
                const Matrix k1 = rhs(rho);
                const Matrix k2 = rhs(rho + 0.5 * dt * k1);
                const Matrix k3 = rhs(rho + 0.5 * dt * k2);
                const Matrix k4 = rhs(rho + dt * k3);
                rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            now = target;
        }
        out.push_back(sample(now));
    }
    return out;
}

} // namespace lmg
