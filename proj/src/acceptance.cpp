#include "lmg/acceptance.hpp"

#include "lmg/brute_force.hpp"
#include "lmg/chebyshev.hpp"
#include "lmg/dicke.hpp"
#include "lmg/echo.hpp"
#include "lmg/errors.hpp"
#include "lmg/meanfield.hpp"
#include "lmg/open_system.hpp"
#include "lmg/operators.hpp"
#include "lmg/qfi.hpp"
#include "lmg/spectrum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace lmg {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double x, int prec = 4) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    return buf;
}

LmgParams params(int N, double Omega, double omega = 0.0, double chi = 1.0) {
    LmgParams p;
    p.N = N;
    p.chi = chi;
    p.Omega = Omega;
    p.omega = omega;
    return p;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

// Field peaks of F_Q for both perturbation axes, sharing one decomposition per
// grid point; the refinement vertex triggers at most one extra diagonalization.
struct PeakPair {
    PeakResult x, z;
};

PeakPair critical_peaks(int N, double omega, double t, const std::vector<double>& grid) {
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    std::map<double, double> fx, fz;
    for (double Om : grid) {
        const SpectralDecomposition dec = diagonalize(params(N, Om, omega));
        fx[Om] = make_eigen_qfi_context(dec, PerturbationAxis::Transverse, psi0).qfi_at(t);
        fz[Om] =
            make_eigen_qfi_context(dec, PerturbationAxis::Longitudinal, psi0).qfi_at(t);
    }
    const auto cached = [&](std::map<double, double>& cache, PerturbationAxis ax) {
        return [&cache, ax, N, omega, t, &psi0](double Om) {
            const auto it = cache.find(Om);
            if (it != cache.end()) return it->second;
            const double v =
                qfi_exact_eigenbasis(diagonalize(params(N, Om, omega)), ax, t, psi0).value;
            cache.emplace(Om, v);
            return v;
        };
    };
    PeakPair pp;
    pp.x = refine_peak(grid, cached(fx, PerturbationAxis::Transverse));
    pp.z = refine_peak(grid, cached(fz, PerturbationAxis::Longitudinal));
    return pp;
}

CriterionResult check_c1() {
    CriterionResult r;
    const CriticalFieldPair mf = critical_field_analytic(kPi, 0.0);
    const double boundary = critical_field_longitudinal(0.0);
    const bool mf_ok = mf.plus_valid && std::abs(mf.plus - 0.5) < 1e-14 &&
                       std::abs(boundary - 0.5) < 1e-14;

    const PeakPair pp = critical_peaks(1000, 1e-4, 1e3, linear_grid(0.42, 0.60, 19));
    const bool x_ok = std::abs(pp.x.location - 0.5) <= 0.05 && pp.x.location >= 0.5 - 2e-3;
    const bool z_ok = std::abs(pp.z.location - 0.5) <= 0.05 && pp.z.location <= 0.5 + 2e-3;

    r.passed = mf_ok && x_ok && z_ok;
    r.detail = "mean-field boundary " + fmt(mf.plus, 16) + " (expect 0.5 exact); " +
               "N=1000 peaks x=" + fmt(pp.x.location) + " (from above), z=" +
               fmt(pp.z.location) + " (from below), tol |peak-0.5| <= 0.05";
    return r;
}

CriterionResult check_c2() {
    CriterionResult r;
    bool ok = true;
    for (double om : {-0.1249, -0.1, 0.0, 0.3}) {
        const double v = critical_field_longitudinal(om);
        ok = ok && std::isfinite(v) && v > 0.0;
    }
    ok = ok && std::abs(critical_field_longitudinal(0.0) - 0.5) < 1e-14;
    int thrown = 0;
    for (double om : {-0.125, -0.13, -0.5}) {
        try {
            (void)critical_field_longitudinal(om);
        } catch (const CrossoverRegime&) {
            ++thrown;
        }
    }
    r.passed = ok && thrown == 3;
    r.detail = "real boundary for omega/chi > -1/8, CrossoverRegime at/below (" +
               std::to_string(thrown) + "/3 thrown)";
    return r;
}

CriterionResult check_c3() {
    CriterionResult r;
    const SpectralDecomposition dec = diagonalize(params(500, 0.5, 1e-4));
    const EqptProfile prof = eqpt_profile(dec, coherent_state(500, kPi, 0.0));
    const EqptFit fx = fit_eqpt_exponent(prof, PerturbationAxis::Transverse, 3);
    const EqptFit fz = fit_eqpt_exponent(prof, PerturbationAxis::Longitudinal, 3);
    const bool x_ok = fx.gamma >= 0.465 && fx.gamma <= 0.525;
    const bool z_ok = fz.gamma >= 0.20 && fz.gamma <= 0.30;
    r.passed = x_ok && z_ok;
    r.detail = "N=500 spectral exponents gamma_x=" + fmt(fx.gamma) +
               " (expect [0.465, 0.525]), gamma_z=" + fmt(fz.gamma) +
               " (expect [0.20, 0.30])";
    return r;
}

CriterionResult check_c4() {
    CriterionResult r;
    const std::vector<int> sizes{100, 141, 200, 283, 400, 566, 800};
    const std::vector<double> grid = linear_grid(0.40, 0.62, 12);
    std::vector<std::pair<double, double>> px, pz;
    for (int N : sizes) {
        const PeakPair pp = critical_peaks(N, 1e-4, 1e3, grid);
        px.emplace_back(N, pp.x.value);
        pz.emplace_back(N, pp.z.value);
    }
    const PowerFit fx = scaling_fit(px);
    const PowerFit fz = scaling_fit(pz);
    const bool x_ok = fx.b >= 1.35 && fx.b <= 1.65;
    const bool z_ok = fz.b >= 1.60 && fz.b <= 1.90;
    r.passed = x_ok && z_ok;
    r.detail = "peak F_Q ~ N^b over N in [100, 800]: b_x=" + fmt(fx.b) +
               " (expect [1.35, 1.65]), b_z=" + fmt(fz.b) + " (expect [1.60, 1.90])";
    return r;
}

CriterionResult check_c5() {
    CriterionResult r;
    const int N = 200;
    const double Om = 0.5, t = 0.05;
    const SpectralDecomposition dec = diagonalize(params(N, Om));
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const double fx =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Transverse, t, psi0).value;
    const double fz =
        qfi_exact_eigenbasis(dec, PerturbationAxis::Longitudinal, t, psi0).value;
    const double rx = fx / (N * t * t);
    const double rz = fz / (Om * Om * N * t * t * t * t / 4.0);
    r.passed = std::abs(rx - 1.0) <= 0.02 && std::abs(rz - 1.0) <= 0.02;
    r.detail = "chi*t=0.05: F_x/(N t^2)=" + fmt(rx, 6) +
               ", F_z/(Omega^2 N t^4/4)=" + fmt(rz, 6) + " (expect 1 +- 2%)";
    return r;
}

CriterionResult check_c6() {
    CriterionResult r;
    const int N = 200;
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const std::vector<double> Oms{0.3, 0.45, 0.55, 0.7, 0.9};
    const std::vector<double> times{1.0, 3.0, 10.0, 30.0, 100.0};
    double worst_fd = 0.0;
    for (double Om : Oms) {
        const LmgParams p = params(N, Om, 1e-4);
        const SpectralDecomposition dec = diagonalize(p);
        for (PerturbationAxis ax :
             {PerturbationAxis::Transverse, PerturbationAxis::Longitudinal}) {
            const EigenQfiContext ctx = make_eigen_qfi_context(dec, ax, psi0);
            for (double t : times) {
                const double fe = ctx.qfi_at(t);
                const double fd = qfi_finite_difference(p, ax, t, psi0).value;
                worst_fd = std::max(worst_fd, std::abs(fd - fe) / std::abs(fe));
            }
        }
    }
    // the secular law explains the peak scaling, so it is held to account
    // across the transition region it describes
    double worst_sec = 0.0;
    int compared = 0;
    const double t_long = 1e3;
    for (double Om : {0.40, 0.45, 0.50, 0.55, 0.60}) {
        const SpectralDecomposition dec = diagonalize(params(N, Om, 1e-4));
        for (PerturbationAxis ax :
             {PerturbationAxis::Transverse, PerturbationAxis::Longitudinal}) {
            const SecularCoefficient sc = qfi_secular(dec, ax, psi0);
            if (sc.value <= 1e-6 * N) continue;
            const double fe = qfi_exact_eigenbasis(dec, ax, t_long, psi0).value;
            const double fs = 4.0 * t_long * t_long * sc.value;
            worst_sec = std::max(worst_sec, std::abs(fs - fe) / std::abs(fe));
            ++compared;
        }
    }
    r.passed = worst_fd <= 0.01 && worst_sec <= 0.03 && compared > 0;
    r.detail = "echo-fd vs eigen worst rel dev " + fmt(worst_fd) +
               " (tol 0.01) on 5x5 grid; secular vs eigen worst " + fmt(worst_sec) +
               " (tol 0.03, " + std::to_string(compared) +
               " branches on the transition bracket)";
    return r;
}

CriterionResult check_c7() {
    CriterionResult r;
    const int N = 300;
    const LmgParams p = params(N, 0.4, 1e-4);
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const SpectralDecomposition dec = diagonalize(p);
    const EqptProfile prof = eqpt_profile(dec, psi0);
    double diag_avg = 0.0;
    for (int n = 0; n <= N; ++n) diag_avg += prof.weights(n) * prof.sz_over_n(n) * N;

    // incommensurate long-time samples: golden-ratio sequence over [500, 1000]
    const CollectiveOperator sz = spin_z(N);
    const double golden = 0.6180339887498949;
    double acc = 0.0;
    const int M = 400;
    for (int k = 0; k < M; ++k) {
        const double t = 500.0 + 500.0 * std::fmod(k * golden, 1.0);
        acc += expectation(sz, eigen_evolve(dec, psi0, t));
    }
    const double time_avg = acc / M;
    const double tol = 0.02 * 0.5 * N;
    r.passed = std::abs(diag_avg - time_avg) <= tol;
    r.detail = "diagonal-ensemble Sz=" + fmt(diag_avg, 6) + " vs propagated average " +
               fmt(time_avg, 6) + " (tol " + fmt(tol) + ")";
    return r;
}

CriterionResult check_c8() {
    CriterionResult r;
    std::mt19937 gen(94111u);
    std::uniform_real_distribution<double> u_theta(0.15, kPi - 0.15);
    std::uniform_real_distribution<double> u_phi(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> u_Om(0.0, 1.2);
    std::uniform_real_distribution<double> u_om(-0.3, 0.3);
    std::uniform_real_distribution<double> u_t(0.5, 30.0);
    std::uniform_int_distribution<int> u_N(32, 512);
    double worst_ratio = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const double theta = u_theta(gen), phi = u_phi(gen);
        const LmgParams p = params(u_N(gen), u_Om(gen), u_om(gen));
        const double t = u_t(gen);
        const PerturbationAxis ax = (draw % 2) ? PerturbationAxis::Transverse
                                               : PerturbationAxis::Longitudinal;
        const double f = meanfield_qfi(theta, phi, p, t, ax);
        worst_ratio = std::max(worst_ratio, f / (p.N * t * t));
    }
    const bool bound_ok = worst_ratio <= 1.0 + 1e-6;

    double best = 0.0;
    const int N = 200;
    const double t = 1e3;
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    for (double Om : {0.44, 0.46, 0.48, 0.50, 0.52}) {
        const double f = qfi_exact_eigenbasis(diagonalize(params(N, Om, 1e-4)),
                                              PerturbationAxis::Longitudinal, t, psi0)
                             .value;
        best = std::max(best, f / (N * t * t));
    }
    r.passed = bound_ok && best > 2.0;
    r.detail = "mean-field F_Q/(N t^2) worst of 100 draws " + fmt(worst_ratio, 8) +
               " (expect <= 1+1e-6); quantum F_z/(N t^2) at the transition " +
               fmt(best) + " (expect > 2)";
    return r;
}

CriterionResult check_c9() {
    CriterionResult r;
    EchoSpec spec;
    spec.params = params(100, 0.5, 0.0);
    spec.axis = PerturbationAxis::Longitudinal;
    spec.delta = 0.0;
    std::vector<double> grid;
    for (int k = 1; k <= 40; ++k) grid.push_back(k);
    const TimeMaximum tm = sensitivity_time_maximum(
        spec, coherent_state(100, kPi, 0.0), spin_y(100), "Sy", grid);
    const bool sub_sql = tm.value > 1.0;

    const std::vector<int> sizes{100, 141, 200, 283, 400, 566, 800};
    std::vector<double> tgrid;
    for (int k = 1; k <= 20; ++k) tgrid.push_back(2.0 * k);
    std::vector<std::pair<double, double>> lon, tra;
    for (int N : sizes) {
        const DickeState psi0 = coherent_state(N, kPi, 0.0);
        const CollectiveOperator sy = spin_y(N);
        EchoSpec s;
        s.params = params(N, 0.5, 0.0);
        s.delta = 0.0;
        s.axis = PerturbationAxis::Longitudinal;
        TimeMaximum m = sensitivity_time_maximum(s, psi0, sy, "Sy", tgrid);
        lon.emplace_back(N, m.value * N * m.t_max * m.t_max);
        s.axis = PerturbationAxis::Transverse;
        m = sensitivity_time_maximum(s, psi0, sy, "Sy", tgrid);
        tra.emplace_back(N, m.value * N * m.t_max * m.t_max);
    }
    const PowerFit fl = scaling_fit(lon);
    const PowerFit ft = scaling_fit(tra);
    const bool lon_ok = fl.b >= 1.78 - 0.15 && fl.b <= 1.78 + 0.15;
    const bool tra_ok = ft.b >= 1.40 - 0.15 && ft.b <= 1.40 + 0.15;
    r.passed = sub_sql && lon_ok && tra_ok;
    r.detail = "N=100 peak normalized sensitivity " + fmt(tm.value) +
               " at t=" + fmt(tm.t_max) + " (expect > 1); scaling exponents long=" +
               fmt(fl.b) + " (expect 1.78+-0.15), trans=" + fmt(ft.b) +
               " (expect 1.40+-0.15)";
    return r;
}

CriterionResult check_c10() {
    CriterionResult r;
    const double theta = 2.2, phi = 0.7, t = 5.0;
    double worst = 0.0;
    for (int N : {2, 4, 6}) {
        for (double gamma : {0.0, 0.01, 0.1}) {
            for (double Om : {0.4, 0.7}) {
                const LmgParams p = params(N, Om, 0.02);
                const CollectiveMoments ref =
                    brute_force_master_equation(p, gamma, theta, phi, {t}, 0.01)[0];
                const LindbladStepper st = make_lindblad_stepper(p, gamma, 0.01);
                const BlockDensityMatrix rho =
                    lindblad_evolve(st, block_from_pure(coherent_state(N, theta, phi)), t);
                worst = std::max(
                    {worst, std::abs(collective_moment(rho, Moment::Sx) - ref.sx),
                     std::abs(collective_moment(rho, Moment::Sy) - ref.sy),
                     std::abs(collective_moment(rho, Moment::Sz) - ref.sz),
                     std::abs(collective_moment(rho, Moment::Sx2) - ref.sx2),
                     std::abs(collective_moment(rho, Moment::Sy2) - ref.sy2),
                     std::abs(collective_moment(rho, Moment::Sz2) - ref.sz2)});
            }
        }
    }
    const bool oracle_ok = worst <= 1e-8;

    const int N = 100;
    const double gamma = 0.2, td = 5.0;
    const LmgParams free = params(N, 0.0, 0.0, 0.0);
    const LindbladStepper st = make_lindblad_stepper(free, gamma);
    const BlockDensityMatrix rho =
        lindblad_evolve(st, block_from_pure(coherent_state(N, kPi / 2, 0.0)), td);
    const double expect = 0.5 * N * std::exp(-0.5 * gamma * td);
    const double decay_dev = std::abs(collective_moment(rho, Moment::Sx) - expect);
    r.passed = oracle_ok && decay_dev <= 1e-6;
    r.detail = "block vs dense worst moment dev " + fmt(worst, 3) +
               " (tol 1e-8, 18 configs); N=100 dephasing decay dev " + fmt(decay_dev, 3) +
               " (tol 1e-6)";
    return r;
}

CriterionResult check_c11() {
    CriterionResult r;
    const int N = 100;
    const LmgParams p = params(N, 0.5, 0.0);
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const std::vector<double> grid{4.0, 8.0, 12.0, 16.0, 20.0, 24.0};

    double peak0 = 0.0;
    {
        const CollectiveOperator sy = spin_y(N);
        EchoSpec spec;
        spec.params = p;
        spec.axis = PerturbationAxis::Longitudinal;
        spec.delta = 0.0;
        for (double t : grid) {
            spec.t = t;
            peak0 = std::max(peak0, observable_sensitivity(spec, psi0, sy, "Sy").normalized);
        }
    }
    double peaks[2] = {0.0, 0.0};
    const double gammas[2] = {1e-2, 1e-1};
    for (int gi = 0; gi < 2; ++gi) {
        OpenEchoSpec spec;
        spec.params = p;
        spec.gamma = gammas[gi];
        spec.axis = PerturbationAxis::Longitudinal;
        spec.delta = 0.0;
        for (double t : grid) {
            spec.t = t;
            peaks[gi] =
                std::max(peaks[gi], open_echo_sensitivity(spec, psi0, Moment::Sy, "Sy").normalized);
        }
    }
    const bool persists = peaks[0] >= 0.5 * peak0;
    const bool monotone = peak0 > peaks[0] && peaks[0] > peaks[1];
    r.passed = persists && monotone;
    r.detail = "transient peak: Gamma=0 " + fmt(peak0) + ", 1e-2 " + fmt(peaks[0]) +
               " (expect >= half), 1e-1 " + fmt(peaks[1]) + " (expect monotone decay)";
    return r;
}

CriterionResult check_c12() {
    CriterionResult r;
    const int N = 500;
    const LmgParams p = params(N, 0.5, 1e-4);
    const DickeState psi0 = coherent_state(N, kPi, 0.0);
    const CollectiveOperator H = build_hamiltonian(p);
    const SpectralDecomposition dec = diagonalize(p);
    double worst = 0.0, worst_norm = 0.0;
    for (double t : {10.0, 1e3}) {
        const DickeState a = evolve(H, p, psi0, t);
        const DickeState b = eigen_evolve(dec, psi0, t);
        worst = std::max(worst, (a.amp - b.amp).norm());
        worst_norm = std::max(worst_norm, std::abs(a.amp.norm() - 1.0));
    }
    r.passed = worst <= 1e-9 && worst_norm <= 1e-10;
    r.detail = "polynomial vs eigenbasis propagation dev " + fmt(worst, 3) +
               " (tol 1e-9) at N=500, chi*t in {10, 1e3}; norm drift " +
               fmt(worst_norm, 3) + " (every propagation gated at 1e-10)";
    return r;
}

using CheckFn = CriterionResult (*)();

struct CriterionSpec {
    int id;
    const char* title;
    CheckFn fn;
};

const CriterionSpec kCriteria[] = {
    {1, "critical point from QFI peaks", check_c1},
    {2, "crossover boundary of the longitudinal critical field", check_c2},
    {3, "excited-state transition exponents", check_c3},
    {4, "QFI peak scaling with system size", check_c4},
    {5, "short-time sensitivity laws", check_c5},
    {6, "method cross-validation (echo-fd, eigenbasis, secular)", check_c6},
    {7, "order-parameter diagonal-ensemble identity", check_c7},
    {8, "classical bound and quantum enhancement", check_c8},
    {9, "echo sensitivity beats the standard limit and scales", check_c9},
    {10, "open-system solver against dense oracle and analytic decay", check_c10},
    {11, "sensitivity peak survives weak dephasing", check_c11},
    {12, "propagator certification", check_c12},
};

} // namespace

bool AcceptanceReport::all_passed() const {
    if (results.empty()) return false;
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

int criterion_count() { return static_cast<int>(std::size(kCriteria)); }

const char* criterion_title(int id) {
    for (const auto& c : kCriteria)
        if (c.id == id) return c.title;
    return "";
}

AcceptanceReport run_acceptance(const std::vector<int>& only, std::ostream& out) {
    AcceptanceReport report;
    for (const auto& spec : kCriteria) {
        if (!only.empty() &&
            std::find(only.begin(), only.end(), spec.id) == only.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult res;
        try {
            res = spec.fn();
        } catch (const std::exception& e) {
            res.passed = false;
            res.detail = std::string("exception: ") + e.what();
        }
        res.id = spec.id;
        res.title = spec.title;
        res.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char line[32];
        std::snprintf(line, sizeof(line), "c%02d %s ", res.id,
                      res.passed ? "PASS" : "FAIL");
        out << line << res.title << " | " << res.detail << " | "
            << fmt(res.wall_seconds, 3) << "s\n";
        out.flush();
        report.results.push_back(std::move(res));
    }
    int passed = 0;
    for (const auto& r : report.results) passed += r.passed;
    out << (report.all_passed() ? "ACCEPTANCE PASS " : "ACCEPTANCE FAIL ") << passed << "/"
        << report.results.size() << " criteria passed\n";
    return report;
}

} // namespace lmg
