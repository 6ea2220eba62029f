#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmg/chebyshev.hpp"
#include "lmg/echo.hpp"
#include "lmg/errors.hpp"
#include "lmg/qfi.hpp"
#include "lmg/wigner.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace lmg;

namespace {

constexpr double kPi = 3.14159265358979323846;

LmgParams params(int N, double Omega, double omega = 0.0, double chi = 1.0) {
    LmgParams p;
    p.N = N;
    p.chi = chi;
    p.Omega = Omega;
    p.omega = omega;
    return p;
}

double overlap(const DickeState& a, const DickeState& b) {
    return std::abs(a.amp.dot(b.amp));
}

// Gauss-Legendre nodes/weights on [-1, 1]
void gauss_legendre(int M, std::vector<double>& x, std::vector<double>& w) {
    x.assign(M, 0.0);
    w.assign(M, 0.0);
    for (int i = 0; i < M; ++i) {
        double xi = std::cos(kPi * (i + 0.75) / (M + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = xi;
            for (int k = 2; k <= M; ++k) {
                const double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = M * (xi * p1 - p0) / (xi * xi - 1.0);
            const double step = p1 / dp;
            xi -= step;
            if (std::abs(step) < 1e-15) break;
        }
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
}

double sphere_integral(const WignerKernel& kernel, const DickeState& state) {
    std::vector<double> x, w;
    const int M = kernel.N / 2 + 12;
    gauss_legendre(M, x, w);
    const int K = kernel.N + 28;
    double acc = 0.0;
    for (int j = 0; j < M; ++j) {
        const double theta = std::acos(x[j]);
        double ring = 0.0;
        for (int i = 0; i < K; ++i)
            ring += wigner_at(kernel, state, theta, 2.0 * kPi * i / K);
        acc += w[j] * ring * (2.0 * kPi / K);
    }
    return acc;
}

} // namespace

TEST_CASE("zero-detuning echo restores the initial state") {
    const LmgParams p = params(100, 0.5);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 0.0, 5.0};
    const DickeState f = echo_final_state(spec, psi0);
    CHECK(overlap(psi0, f) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("echo overlap equals the two-state overlap of the shifted drives") {
    const LmgParams p = params(100, 0.5);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const double delta = 2e-3, t = 12.0;
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, delta, t};
    const DickeState f = echo_final_state(spec, psi0);

    LmgParams lower = p;
    lower.omega -= 0.5 * delta;
    const double le = loschmidt_echo(lower, delta, PerturbationAxis::Longitudinal,
                                     t, psi0);
    CHECK(overlap(psi0, f) == doctest::Approx(le).epsilon(1e-10));
}

TEST_CASE("echo overlap is even in the detuning") {
    const LmgParams p = params(80, 0.45, 0.02);
    const DickeState psi0 = coherent_state(p.N, 0.9 * kPi, 0.3);
    EchoSpec spec{p, PerturbationAxis::Transverse, 3e-3, 7.0};
    const double plus = overlap(psi0, echo_final_state(spec, psi0));
    spec.delta = -spec.delta;
    const double minus = overlap(psi0, echo_final_state(spec, psi0));
    CHECK(plus == doctest::Approx(minus).epsilon(1e-12));
}

TEST_CASE("critical echo displaces the state along y") {
    const LmgParams p = params(100, 0.5);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 2e-3, 12.0};
    const DickeState f = echo_final_state(spec, psi0);
    const double sy = expectation(spin_y(p.N), f);
    const double sz = expectation(spin_z(p.N), f);
    CHECK(std::abs(sy) > 1.0);                  // visible displacement
    CHECK(std::abs(sz + 0.5 * p.N) < 0.05 * p.N); // still near the pole
}

TEST_CASE("free-rotation echo sits exactly at the projection-noise limit") {
    // chi = 0, Omega = 0: the echo composes to a rotation by delta*t about z,
    // and S_y on an x-polarized state reads it out with the ideal slope
    const LmgParams p = params(64, 0.0, 0.3, 0.0);
    const DickeState psi0 = coherent_state(p.N, kPi / 2, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 0.0, 3.0};
    const SensitivityResult r =
        observable_sensitivity(spec, psi0, spin_y(p.N), "Sy");
    CHECK(r.normalized == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(r.slope) == doctest::Approx(0.5 * p.N * spec.t).epsilon(1e-6));
    CHECK(r.variance == doctest::Approx(0.25 * p.N).epsilon(1e-9));
    CHECK_FALSE(r.variance_discrepancy);
}

TEST_CASE("commuting arms cancel and leave no signal") {
    // diagonal drive: the two arms compose to a pure phase on the pole state
    const LmgParams p = params(100, 0.0, 0.3, 0.0);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 0.0, 4.0};
    const SensitivityResult r =
        observable_sensitivity(spec, psi0, spin_y(p.N), "Sy");
    CHECK(r.slope == 0.0);
    CHECK(r.inverse_variance == 0.0);
    CHECK(r.variance == doctest::Approx(0.25 * p.N).epsilon(1e-12));
}

TEST_CASE("deterministic observable is rejected") {
    // pole state under a diagonal drive keeps S_z dispersion-free
    const LmgParams p = params(60, 0.0, 0.3, 0.0);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 0.0, 2.0};
    CHECK_THROWS_AS(
        (void)observable_sensitivity(spec, psi0, spin_z(p.N), "Sz"),
        ZeroVariance);
}

TEST_CASE("transient sensitivity beats the projection-noise limit at the transition") {
    const LmgParams p = params(100, 0.5);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 0.0, 10.0};
    const SensitivityResult r =
        observable_sensitivity(spec, psi0, spin_y(p.N), "Sy");
    CHECK(r.normalized > 1.0);

    // moment-based bound never exceeds the full information content
    const double fq =
        qfi_finite_difference(p, PerturbationAxis::Longitudinal, spec.t, psi0)
            .value;
    CHECK(r.inverse_variance <= fq * 1.02);
}

TEST_CASE("moment bound stays below the information content off axis") {
    const LmgParams p = params(100, 0.556);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Transverse, 0.0, 8.0};
    const SensitivityResult r =
        observable_sensitivity(spec, psi0, spin_y(p.N), "Sy");
    const double fq =
        qfi_finite_difference(p, PerturbationAxis::Transverse, spec.t, psi0).value;
    CHECK(r.inverse_variance > 0.0);
    CHECK(r.inverse_variance <= fq * 1.02);
}

TEST_CASE("transverse time maximum separates the phases") {
    const DickeState psi0 = coherent_state(100, kPi, 0.0);
    const CollectiveOperator sy = spin_y(100);
    const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 3.0, 5.0,
                                   7.0,  10.0, 14.0, 20.0, 27.0, 35.0};

    // trapped phase: the best the echo can do is the short-time rotation
    // limit, i.e. the projection-noise line itself
    const EchoSpec ordered{params(100, 0.3), PerturbationAxis::Transverse, 0.0, 0.0};
    const TimeMaximum to = sensitivity_time_maximum(ordered, psi0, sy, "Sy", grid);
    CHECK(to.t_max == doctest::Approx(grid.front()));
    CHECK(to.value > 0.9);
    CHECK(to.value < 1.02);

    // crossing phase: a genuine transient peak above it
    const EchoSpec disordered{params(100, 0.7), PerturbationAxis::Transverse, 0.0, 0.0};
    const TimeMaximum td = sensitivity_time_maximum(disordered, psi0, sy, "Sy", grid);
    CHECK(td.value > 1.2);
    CHECK(td.t_max > grid.front());
    CHECK(td.t_max < grid.back());
}

TEST_CASE("longitudinal time maximum peaks in the transient window") {
    const LmgParams p = params(100, 0.5);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 0.0, 0.0};
    const std::vector<double> grid{1.0, 2.0, 4.0, 6.0, 8.0, 10.0,
                                   13.0, 16.0, 20.0, 25.0, 32.0, 40.0};
    const TimeMaximum tm =
        sensitivity_time_maximum(spec, psi0, spin_y(p.N), "Sy", grid);
    CHECK(tm.t_max > 5.0);
    CHECK(tm.t_max < 20.0);
    CHECK(tm.value > 5.0);
}

TEST_CASE("flat sensitivity yields no peak") {
    const LmgParams p = params(60, 0.0, 0.3, 0.0);
    const DickeState psi0 = coherent_state(p.N, kPi, 0.0);
    const EchoSpec spec{p, PerturbationAxis::Longitudinal, 0.0, 0.0};
    const std::vector<double> grid{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK_THROWS_AS(
        (void)sensitivity_time_maximum(spec, psi0, spin_y(p.N), "Sy", grid),
        NoPeak);
}

TEST_CASE("polarized state shows a single positive peak at its pole") {
    const int N = 100;
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const WignerKernel kernel = make_wigner_kernel(N);
    const double peak = wigner_at(kernel, psi0, kPi, 0.0);
    CHECK(peak > 10.0);
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j < 8; ++j) {
            const double theta = kPi * i / 10.0, phi = 2.0 * kPi * j / 8.0;
            CHECK(wigner_at(kernel, psi0, theta, phi) <= peak * (1.0 + 1e-12));
        }
    }
    // azimuthal symmetry about the polarization axis
    CHECK(wigner_at(kernel, psi0, 0.7, 1.1) ==
          doctest::Approx(wigner_at(kernel, psi0, 0.7, 2.9)).epsilon(1e-10));
}

TEST_CASE("quasi-probability integrates to one over the sphere") {
    const int N = 100;
    const WignerKernel kernel = make_wigner_kernel(N);
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    CHECK(sphere_integral(kernel, psi0) == doctest::Approx(1.0).epsilon(1e-8));

    LmgParams p = params(N, 0.5, 1e-3);
    const DickeState mid = evolve(build_hamiltonian(p), p, psi0, 12.0);
    CHECK(sphere_integral(kernel, mid) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("critical evolution spreads the state and turns it non-classical") {
    const int N = 100;
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    LmgParams p = params(N, 0.5, 1e-3);
    const DickeState mid = evolve(build_hamiltonian(p), p, psi0, 12.0);
    const WignerKernel kernel = make_wigner_kernel(N);

    double max0 = -1e300, maxm = -1e300, minm = 1e300;
    for (int i = 0; i <= 40; ++i) {
        for (int j = 0; j < 32; ++j) {
            const double theta = kPi * i / 40.0, phi = 2.0 * kPi * j / 32.0;
            max0 = std::max(max0, wigner_at(kernel, psi0, theta, phi));
            const double w = wigner_at(kernel, mid, theta, phi);
            maxm = std::max(maxm, w);
            minm = std::min(minm, w);
        }
    }
    CHECK(maxm < 0.5 * max0); // peak melted down
    CHECK(minm < -0.5);       // interference fringes go negative
}

TEST_CASE("polar remap sends the south pole to the disk center") {
    const int N = 40;
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const std::vector<double> thetas{0.0, kPi / 2, kPi};
    const std::vector<double> phis{0.0, kPi};
    const auto samples = wigner_polar_samples(psi0, thetas, phis);
    REQUIRE(samples.size() == 6);
    CHECK(samples[0].r == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-12));
    CHECK(samples[2].r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(samples[4].r < 1e-8);
    CHECK(samples[4].value > samples[0].value);
}

TEST_CASE("density form reproduces the pure-state quasi-probability") {
    const int N = 60;
    LmgParams p = params(N, 0.6);
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const DickeState mid = evolve(build_hamiltonian(p), p, psi0, 5.0);
    const Eigen::MatrixXcd rho = mid.amp * mid.amp.adjoint();
    const WignerKernel kernel = make_wigner_kernel(N);
    for (double theta : {0.4, 1.7, 2.9}) {
        for (double phi : {0.3, 4.1}) {
            CHECK(wigner_at(kernel, rho, theta, phi) ==
                  doctest::Approx(wigner_at(kernel, mid, theta, phi))
                      .epsilon(1e-10));
        }
    }
}
