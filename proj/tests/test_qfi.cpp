#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmg/chebyshev.hpp"
#include "lmg/errors.hpp"
#include "lmg/qfi.hpp"

#include <cmath>
#include <complex>

using namespace lmg;

namespace {
const double PI = 3.14159265358979323846;

LmgParams params(int N, double Omega, double omega = 0.0, double chi = 1.0) {
    LmgParams p;
    p.N = N;
    p.chi = chi;
    p.Omega = Omega;
    p.omega = omega;
    return p;
}

DickeState down_state(int N) { return coherent_state(N, PI, 0.0); }

DickeState eigenstate(const SpectralDecomposition& dec, int n) {
    DickeState s;
    s.N = dec.params.N;
    s.amp = dec.vectors.col(n).cast<std::complex<double>>();
    return s;
}
} // namespace

TEST_CASE("echo is one for zero detuning and zero time") {
    const LmgParams p = params(40, 0.5);
    const DickeState psi0 = down_state(40);
    CHECK(loschmidt_echo(p, 0.0, PerturbationAxis::Longitudinal, 3.0, psi0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(loschmidt_echo(p, 0.02, PerturbationAxis::Transverse, 0.0, psi0) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("echo matches an eigendecomposition overlap oracle") {
    const int N = 100;
    const double t = 10.0, delta = 1e-3;
    const LmgParams p = params(N, 0.5);
    const DickeState psi0 = down_state(N);

    const double echo =
        loschmidt_echo(p, delta, PerturbationAxis::Longitudinal, t, psi0);

    LmgParams q = p;
    q.omega += delta;
    const DickeState a = eigen_evolve(diagonalize(p), psi0, t);
    const DickeState b = eigen_evolve(diagonalize(q), psi0, t);
    const double oracle = std::abs(a.amp.dot(b.amp));

    CHECK(echo < 0.99999);
    CHECK(echo > 0.9);
    CHECK(echo == doctest::Approx(oracle).epsilon(1e-9));

    // the reversed detuning differs only at cubic order in delta
    const double mirrored =
        loschmidt_echo(p, -delta, PerturbationAxis::Longitudinal, t, psi0);
    CHECK(std::abs(echo - mirrored) < 0.1 * (1.0 - echo));
}

TEST_CASE("static generator limit reproduces N t^2") {
    // chi = Omega = 0: H = -omega Sz commutes with the probe for every field,
    // so the sensitivity is 4 t^2 Var(Sz) = N t^2 on the equator exactly.
    const int N = 64;
    const double t = 2.0;
    const LmgParams p = params(N, 0.0, 0.3, 0.0);
    const DickeState psi0 = coherent_state(N, 0.5 * PI, 0.0);

    const QfiResult fd =
        qfi_finite_difference(p, PerturbationAxis::Longitudinal, t, psi0);
    CHECK(fd.value == doctest::Approx(N * t * t).epsilon(1e-4));

    const QfiResult ex =
        qfi_exact_eigenbasis(diagonalize(p), PerturbationAxis::Longitudinal, t, psi0);
    CHECK(ex.value == doctest::Approx(N * t * t).epsilon(1e-10));
    CHECK(ex.normalized == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("short-time transverse law") {
    const int N = 100;
    const LmgParams p = params(N, 0.5);
    const DickeState psi0 = down_state(N);
    const SpectralDecomposition dec = diagonalize(p);

    const QfiResult tiny =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Transverse, 1e-3, psi0);
    CHECK(tiny.normalized == doctest::Approx(1.0).epsilon(1e-3));

    const QfiResult t05 =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Transverse, 0.05, psi0);
    CHECK(t05.normalized == doctest::Approx(1.0).epsilon(0.02));

    const QfiResult law = qfi_short_time(p, PerturbationAxis::Transverse, 0.05);
    CHECK(law.value == doctest::Approx(N * 0.05 * 0.05).epsilon(1e-14));
}

TEST_CASE("short-time longitudinal law") {
    const int N = 100;
    const double t = 0.05;
    const LmgParams p = params(N, 0.5);
    const DickeState psi0 = down_state(N);

    const double expected = p.Omega * p.Omega * N * std::pow(t, 4) / 4.0;
    const QfiResult ex =
        qfi_exact_eigenbasis(diagonalize(p), PerturbationAxis::Longitudinal, t, psi0);
    CHECK(ex.value == doctest::Approx(expected).epsilon(0.02));

    const QfiResult law = qfi_short_time(p, PerturbationAxis::Longitudinal, t);
    CHECK(law.value == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("finite difference matches the eigenbasis route") {
    const int N = 200;
    const LmgParams p = params(N, 0.5, 1e-4);
    const DickeState psi0 = down_state(N);
    const SpectralDecomposition dec = diagonalize(p);

    for (double t : {10.0, 100.0}) {
        for (PerturbationAxis axis :
             {PerturbationAxis::Transverse, PerturbationAxis::Longitudinal}) {
            const QfiResult ex = qfi_exact_eigenbasis(dec, axis, t, psi0);
            const QfiResult fd = qfi_finite_difference(p, axis, t, psi0);
            CHECK(fd.value == doctest::Approx(ex.value).epsilon(0.01));
            CHECK(fd.normalized ==
                  doctest::Approx(fd.value / (N * t * t)).epsilon(1e-12));
            CHECK(fd.value >= 0.0);
        }
    }
}

TEST_CASE("eigenstate sensitivity stops growing at long times") {
    const int N = 100;
    const LmgParams p = params(N, 2.0); // gapped side: no quasi-degenerate partner
    const SpectralDecomposition dec = diagonalize(p);
    const DickeState ground = eigenstate(dec, 0);

    const QfiResult early =
        qfi_finite_difference(p, PerturbationAxis::Transverse, 10.0, ground);
    const QfiResult late =
        qfi_finite_difference(p, PerturbationAxis::Transverse, 100.0, ground);

    const double r_early = early.value / (10.0 * 10.0);
    const double r_late = late.value / (100.0 * 100.0);
    CHECK(r_late < 0.05 * r_early);
    CHECK(late.normalized < 1e-5);

    const QfiResult ex =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Transverse, 1e3, ground);
    CHECK(ex.normalized < 1e-6);

    // Beyond t ~ 100 the level phases move by more than a radian at any step
    // large enough to register infidelity >= 1e-8: the echo is oscillatory in
    // delta, there is no linear-response step left, and the estimator says so.
    CHECK_THROWS_AS(
        qfi_finite_difference(p, PerturbationAxis::Transverse, 1e3, ground),
        StepNotConverged);
}

TEST_CASE("secular coefficient vanishes for eigenstates") {
    const LmgParams p = params(120, 0.5, 1e-4);
    const SpectralDecomposition dec = diagonalize(p);
    const SecularCoefficient c =
        qfi_secular(dec, PerturbationAxis::Transverse, eigenstate(dec, 17));
    CHECK(c.value < 1e-18);
}

TEST_CASE("longitudinal secular coefficient collapses deep in the disordered phase") {
    const int N = 100;
    const DickeState psi0 = down_state(N);
    const double c5 =
        qfi_secular(diagonalize(params(N, 5.0, 1e-4)), PerturbationAxis::Longitudinal,
                    psi0)
            .value;
    const double c50 =
        qfi_secular(diagonalize(params(N, 50.0, 1e-4)), PerturbationAxis::Longitudinal,
                    psi0)
            .value;
    CHECK(c50 < 0.2 * c5);
    CHECK(c50 < 1e-3 * (N * N / 4.0));
}

TEST_CASE("degenerate spectrum is flagged, split spectrum is not") {
    const LmgParams split = params(50, 0.5, 1e-4);
    CHECK_FALSE(qfi_secular(diagonalize(split), PerturbationAxis::Transverse,
                            down_state(50))
                    .degenerate_warning);

    // Omega = omega = 0 leaves the +-m ladder pairs exactly degenerate
    const LmgParams deg = params(50, 0.0, 0.0);
    CHECK(qfi_secular(diagonalize(deg), PerturbationAxis::Transverse, down_state(50))
              .degenerate_warning);
}

TEST_CASE("secular slope matches exact propagation at long times") {
    const int N = 200;
    const double t = 1e3;
    const LmgParams p = params(N, 0.7, 1e-4);
    const DickeState psi0 = down_state(N);
    const SpectralDecomposition dec = diagonalize(p);

    const SecularCoefficient c =
        qfi_secular(dec, PerturbationAxis::Transverse, psi0);
    REQUIRE(c.value > 1e-6 * N); // validity threshold for the t^2 growth law
    const double secular = 4.0 * t * t * c.value;
    const double exact =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Transverse, t, psi0).value;
    CHECK(exact == doctest::Approx(secular).epsilon(0.05));
}

TEST_CASE("normalized response separates the two phases") {
    const int N = 100;
    const double t = 100.0;
    const DickeState psi0 = down_state(N);

    const QfiResult disordered = qfi_exact_eigenbasis(
        diagonalize(params(N, 20.0)), PerturbationAxis::Transverse, t, psi0);
    CHECK(disordered.normalized == doctest::Approx(1.0).epsilon(0.1));

    const QfiResult ordered = qfi_exact_eigenbasis(
        diagonalize(params(N, 0.05)), PerturbationAxis::Transverse, t, psi0);
    CHECK(ordered.normalized < 0.05);
}

TEST_CASE("synthetic parabola peak is refined to machine accuracy") {
    std::vector<double> grid;
    for (int i = 0; i <= 6; ++i) grid.push_back(0.1 * i);
    auto f = [](double x) { return 1.0 - (x - 0.3) * (x - 0.3); };
    const PeakResult peak = refine_peak(grid, f);
    CHECK(peak.location == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(peak.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(peak.grid_index == 3);

    CHECK_THROWS_AS(refine_peak(grid, [](double x) { return x; }), NoPeak);
    CHECK_THROWS_AS(refine_peak({0.0, 1.0}, f), InvalidParams);
    CHECK_THROWS_AS(refine_peak({0.0, 1.0, 0.5}, f), InvalidParams);
}

TEST_CASE("transverse-field peak sits near the mean-field critical point") {
    const int N = 200;
    const double t = 100.0;
    const LmgParams base = params(N, 0.5, 1e-4);
    const DickeState psi0 = down_state(N);

    std::vector<double> grid;
    for (int i = 0; i <= 7; ++i) grid.push_back(0.25 + 0.1 * i);
    const PeakResult peak =
        find_critical_field(base, PerturbationAxis::Transverse,
                            SweptField::TransverseField, t, psi0, grid,
                            QfiMethod::ExactEigen);
    CHECK(peak.location > 0.3);
    CHECK(peak.location < 0.9);
    CHECK(peak.value / (N * t * t) > 1.2); // peak rises above the plateau
}

TEST_CASE("tilted initial states split the peak in field sign") {
    const int N = 200;
    const LmgParams base = params(N, 0.5);
    const DickeState psi0 = coherent_state(N, 0.9 * PI, 0.2 * PI);

    std::vector<double> grid;
    for (int i = 0; i <= 13; ++i) grid.push_back(-0.90 + 0.15 * i);
    const PeakResult peak =
        find_critical_field(base, PerturbationAxis::Transverse,
                            SweptField::TransverseField, 100.0, psi0, grid,
                            QfiMethod::ExactEigen);

    REQUIRE(peak.local_max_indices.size() >= 2);
    double lo = 1e300, hi = -1e300;
    for (int i : peak.local_max_indices) {
        lo = std::min(lo, grid[i]);
        hi = std::max(hi, grid[i]);
    }
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
}

TEST_CASE("power-law fit recovers an exact scaling") {
    std::vector<std::pair<double, double>> pts;
    for (double N : {100.0, 200.0, 400.0, 800.0})
        pts.emplace_back(N, 2.0 * std::pow(N, 1.5));
    const PowerFit fit = scaling_fit(pts);
    CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.b == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(fit.rms < 1e-12);

    CHECK_THROWS_AS(scaling_fit({{100.0, 1.0}, {200.0, 2.0}, {400.0, 3.0}}),
                    InsufficientPoints);
    pts[2].second = -1.0;
    CHECK_THROWS_AS(scaling_fit(pts), NonPositiveValue);
}

TEST_CASE("qfi is invariant under a global phase of the state") {
    const int N = 80;
    const LmgParams p = params(N, 0.5, 1e-4);
    const SpectralDecomposition dec = diagonalize(p);
    DickeState psi0 = down_state(N);
    DickeState rotated = psi0;
    rotated.amp *= std::exp(std::complex<double>(0.0, 0.7));

    const double a =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Transverse, 25.0, psi0).value;
    const double b =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Transverse, 25.0, rotated).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("negative times are rejected") {
    CHECK_THROWS_AS(qfi_finite_difference(params(10, 0.5),
                                          PerturbationAxis::Transverse, -1.0,
                                          down_state(10)),
                    InvalidParams);
}
