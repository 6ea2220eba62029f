#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmg/brute_force.hpp"
#include "lmg/chebyshev.hpp"
#include "lmg/echo.hpp"
#include "lmg/errors.hpp"
#include "lmg/open_system.hpp"
#include "lmg/spectrum.hpp"

#include <cmath>
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

double purity(const BlockDensityMatrix& rho) {
    double acc = 0.0;
    for (int b = 0; b < rho.block_count(); ++b)
        acc += rho.degeneracy(b) * (rho.blocks[b] * rho.blocks[b]).trace().real();
    return acc;
}

double max_hermiticity_defect(const BlockDensityMatrix& rho) {
    double worst = 0.0;
    for (int b = 0; b < rho.block_count(); ++b)
        worst = std::max(worst,
                         (rho.blocks[b] - rho.blocks[b].adjoint()).cwiseAbs().maxCoeff());
    return worst;
}

double min_block_eigenvalue(const BlockDensityMatrix& rho) {
    double lo = 1e300;
    for (int b = 0; b < rho.block_count(); ++b) {
        if (rho.blocks[b].squaredNorm() == 0.0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.blocks[b],
                                                           Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

} // namespace

TEST_CASE("sector bookkeeping matches the binomial branching") {
    BlockDensityMatrix even = block_zero(4);
    REQUIRE(even.block_count() == 3);
    CHECK(even.j_of(0) == 2.0);
    CHECK(even.dim_of(2) == 1);
    CHECK(even.degeneracy(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(even.degeneracy(1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(even.degeneracy(2) == doctest::Approx(2.0).epsilon(1e-14));

    BlockDensityMatrix odd = block_zero(5);
    REQUIRE(odd.block_count() == 3);
    CHECK(odd.j_of(2) == doctest::Approx(0.5));
    CHECK(odd.degeneracy(1) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(odd.degeneracy(2) == doctest::Approx(5.0).epsilon(1e-14));

    // sum_j d_j (2j+1) exhausts the 2^N product space
    for (int N : {4, 5, 10}) {
        BlockDensityMatrix rho = block_zero(N);
        double dims = 0.0;
        for (int b = 0; b < rho.block_count(); ++b)
            dims += rho.degeneracy(b) * rho.dim_of(b);
        CHECK(dims == doctest::Approx(std::pow(2.0, N)).epsilon(1e-12));
    }
}

TEST_CASE("storage grows cubically, not exponentially") {
    for (int N : {40, 80}) {
        const auto entries = block_zero(N).stored_entries();
        const std::size_t closed =
            static_cast<std::size_t>(N + 1) * (N + 2) * (N + 3) / 6;
        CHECK(entries == closed);
        CHECK(entries > static_cast<std::size_t>(N) * N * N / 6);
        CHECK(entries < static_cast<std::size_t>(N) * N * N);
    }
}

TEST_CASE("pure states embed in the top sector with unit trace") {
    const DickeState psi = coherent_state(30, 2.1, 0.4);
    const BlockDensityMatrix rho = block_from_pure(psi);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
    for (int b = 1; b < rho.block_count(); ++b) CHECK(rho.blocks[b].norm() == 0.0);

    CHECK(collective_moment(rho, Moment::Sx) ==
          doctest::Approx(expectation(spin_x(30), psi)).epsilon(1e-12));
    CHECK(collective_moment(rho, Moment::Sy) ==
          doctest::Approx(expectation(spin_y(30), psi)).epsilon(1e-12));
    CHECK(collective_moment(rho, Moment::Sz) ==
          doctest::Approx(15.0 * std::cos(2.1)).epsilon(1e-9));
    const double var = variance(spin_y(30), psi);
    const double mean = expectation(spin_y(30), psi);
    CHECK(collective_moment(rho, Moment::Sy2) ==
          doctest::Approx(var + mean * mean).epsilon(1e-12));
}

TEST_CASE("stepper honors the stability budget") {
    const LmgParams p = params(40, 0.5);
    const LindbladStepper st = make_lindblad_stepper(p, 0.1);
    const double scale = build_hamiltonian(p).gershgorin_radius() + 0.1 * p.N;
    CHECK(st.dt * scale <= 0.1 + 1e-12);
    CHECK(st.dt * scale > 0.099);

    CHECK_THROWS_AS((void)make_lindblad_stepper(p, -0.1), InvalidParams);
    CHECK_THROWS_AS((void)make_lindblad_stepper(p, 0.1, 0.2), InvalidParams);

    LindbladStepper loose = st;
    loose.dt = 10.0 * st.dt;
    CHECK_THROWS_AS(
        (void)lindblad_evolve(loose, block_from_pure(coherent_state(40, kPi, 0.0)), 1.0),
        InvalidParams);
}

TEST_CASE("closed evolution stays in the top sector and tracks the propagator") {
    const LmgParams p = params(50, 0.5);
    const DickeState psi0 = coherent_state(50, kPi, 0.0);
    const LindbladStepper st = make_lindblad_stepper(p, 0.0, 0.005);
    const BlockDensityMatrix rho = lindblad_evolve(st, block_from_pure(psi0), 10.0);

    for (int b = 1; b < rho.block_count(); ++b) CHECK(rho.blocks[b].norm() == 0.0);

    const DickeState psit = evolve(build_hamiltonian(p), p, psi0, 10.0);
    const Eigen::MatrixXcd diff = rho.blocks[0] - psit.amp * psit.amp.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().cwiseAbs().sum() < 1e-8);

    CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
    CHECK(max_hermiticity_defect(rho) < 1e-12);
}

TEST_CASE("free spins dephase at half the single-particle rate") {
    const LmgParams p = params(40, 0.0, 0.0, 0.0);
    const double gamma = 0.2, t = 5.0;
    const LindbladStepper st = make_lindblad_stepper(p, gamma);
    const BlockDensityMatrix rho =
        lindblad_evolve(st, block_from_pure(coherent_state(40, kPi / 2, 0.0)), t);
    CHECK(collective_moment(rho, Moment::Sx) ==
          doctest::Approx(20.0 * std::exp(-0.5 * gamma * t)).epsilon(1e-6));
    CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
    CHECK(min_block_eigenvalue(rho) > -1e-10);
}

TEST_CASE("dephasing leaks population down the sector ladder") {
    const LmgParams p = params(6, 0.5);
    const LindbladStepper st = make_lindblad_stepper(p, 0.1);
    const BlockDensityMatrix rho =
        lindblad_evolve(st, block_from_pure(coherent_state(6, 2.2, 0.7)), 2.0);
    CHECK(rho.blocks[1].trace().real() > 1e-4);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("block solver agrees with the dense master equation") {
    const double theta = 2.2, phi = 0.7, t = 5.0;
    for (int N : {2, 4, 6}) {
        for (double gamma : {0.0, 0.01, 0.1}) {
            for (double Omega : {0.4, 0.7}) {
                const LmgParams p = params(N, Omega, 0.02);
                const CollectiveMoments ref =
                    brute_force_master_equation(p, gamma, theta, phi, {t}, 0.01)[0];
                const LindbladStepper st = make_lindblad_stepper(p, gamma, 0.01);
                const BlockDensityMatrix rho = lindblad_evolve(
                    st, block_from_pure(coherent_state(N, theta, phi)), t);
                CHECK(std::abs(collective_moment(rho, Moment::Sx) - ref.sx) < 1e-8);
                CHECK(std::abs(collective_moment(rho, Moment::Sy) - ref.sy) < 1e-8);
                CHECK(std::abs(collective_moment(rho, Moment::Sz) - ref.sz) < 1e-8);
                CHECK(std::abs(collective_moment(rho, Moment::Sx2) - ref.sx2) < 1e-8);
                CHECK(std::abs(collective_moment(rho, Moment::Sy2) - ref.sy2) < 1e-8);
                CHECK(std::abs(collective_moment(rho, Moment::Sz2) - ref.sz2) < 1e-8);
                CHECK(ref.trace_error < 1e-10);
            }
        }
    }
}

TEST_CASE("dense oracle reproduces the two-spin closed system") {
    const LmgParams p = params(2, 0.6, 0.1);
    const std::vector<double> ts{1.0, 3.0};
    const auto traj = brute_force_master_equation(p, 0.0, 1.2, 0.5, ts);
    const SpectralDecomposition dec = diagonalize(p);
    const DickeState psi0 = coherent_state(2, 1.2, 0.5);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const DickeState psit = eigen_evolve(dec, psi0, ts[i]);
        CHECK(traj[i].sx == doctest::Approx(expectation(spin_x(2), psit)).epsilon(1e-9));
        CHECK(traj[i].sz == doctest::Approx(expectation(spin_z(2), psit)).epsilon(1e-9));
        CHECK(traj[i].trace_error < 1e-10);
    }
    CHECK_THROWS_AS(
        (void)brute_force_master_equation(params(7, 0.5), 0.0, 1.0, 0.0, {1.0}),
        InvalidParams);
}

TEST_CASE("noisy echo reduces to the pure-state protocol without dephasing") {
    const LmgParams p = params(40, 0.5);
    const DickeState psi0 = coherent_state(40, kPi, 0.0);
    const EchoSpec pure_spec{p, PerturbationAxis::Longitudinal, 0.0, 8.0};
    const SensitivityResult pure =
        observable_sensitivity(pure_spec, psi0, spin_y(40), "Sy");

    OpenEchoSpec open_spec;
    open_spec.params = p;
    open_spec.gamma = 0.0;
    open_spec.axis = PerturbationAxis::Longitudinal;
    open_spec.t = 8.0;
    open_spec.step_budget = 0.01;
    const SensitivityResult open =
        open_echo_sensitivity(open_spec, psi0, Moment::Sy, "Sy");
    CHECK(open.normalized ==
          doctest::Approx(pure.normalized).epsilon(1e-6));
    CHECK(open.variance == doctest::Approx(pure.variance).epsilon(1e-6));
}

TEST_CASE("dephasing degrades the transient sensitivity") {
    const LmgParams p = params(30, 0.5);
    const DickeState psi0 = coherent_state(30, kPi, 0.0);
    OpenEchoSpec spec;
    spec.params = p;
    spec.axis = PerturbationAxis::Longitudinal;
    spec.t = 6.0;
    spec.step_budget = 0.02;

    spec.gamma = 0.0;
    const SensitivityResult clean = open_echo_sensitivity(spec, psi0, Moment::Sy, "Sy");
    spec.gamma = 0.05;
    const SensitivityResult noisy = open_echo_sensitivity(spec, psi0, Moment::Sy, "Sy");

    CHECK(clean.normalized > 1.0);
    CHECK(noisy.normalized > 0.0);
    CHECK(noisy.normalized < 0.5 * clean.normalized);
    CHECK(noisy.variance > 0.25 * p.N); // added noise on top of projection noise
}

TEST_CASE("echo reverses the Hamiltonian but never the dissipator") {
    const LmgParams p = params(20, 0.5);
    const DickeState psi0 = coherent_state(20, kPi, 0.0);
    OpenEchoSpec spec;
    spec.params = p;
    spec.gamma = 0.05;
    spec.axis = PerturbationAxis::Longitudinal;
    spec.t = 4.0;

    const BlockDensityMatrix both = open_echo_final_state(spec, psi0);
    spec.backward_gamma_scale = 0.0; // hypothetical noiseless return arm
    const BlockDensityMatrix half = open_echo_final_state(spec, psi0);
    CHECK(purity(half) > purity(both) + 1e-4);
    CHECK(both.trace() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("time-averaged order parameter") {
    const DickeState psi0 = coherent_state(40, kPi, 0.0);

    SUBCASE("closed limit matches the quantum time average") {
        const LmgParams p = params(40, 0.4);
        const double T = 60.0;
        const double open_avg = open_order_parameter(p, 0.0, psi0, T);
        const SpectralDecomposition dec = diagonalize(p);
        double acc = 0.0, prev = expectation(spin_z(40), psi0), pt = 0.0;
        const int M = 1500;
        for (int i = 1; i <= M; ++i) {
            const double t = T * i / M;
            const double sz = expectation(spin_z(40), eigen_evolve(dec, psi0, t));
            acc += 0.5 * (sz + prev) * (t - pt);
            prev = sz;
            pt = t;
        }
        const double closed_avg = acc / T;
        CHECK(open_avg == doctest::Approx(closed_avg).epsilon(0.01));
        CHECK(open_avg < -0.3 * 20.0); // trapped well below the equator
    }

    SUBCASE("weak dephasing keeps the crossing-phase average near zero") {
        const double avg = open_order_parameter(params(40, 0.7), 0.01, psi0, 150.0);
        CHECK(std::abs(avg) < 0.05 * 20.0);
    }

    SUBCASE("pole state is stationary under pure dephasing") {
        const double avg = open_order_parameter(params(40, 0.0, 0.3), 0.3, psi0, 50.0);
        CHECK(avg == doctest::Approx(-20.0).epsilon(1e-9));
    }
}
