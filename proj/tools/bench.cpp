// Micro-benchmark comparing the serial reference kernels against their OpenMP
// variants, verifying bitwise agreement while timing.
//   lmg_bench [--quick] [--threads K]
#include "lmg/dicke.hpp"
#include "lmg/open_system.hpp"
#include "lmg/operators.hpp"
#include "lmg/qfi.hpp"
#include "lmg/spectrum.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>

using namespace lmg;

namespace {

double time_ms(int reps, const std::function<void()>& fn) {
    fn(); // warm caches
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

LmgParams params(int N) {
    LmgParams p;
    p.N = N;
    p.chi = 1.0;
    p.Omega = 0.55;
    p.omega = 0.03;
    return p;
}

Eigen::VectorXcd random_vector(int dim) {
    std::mt19937 gen(7u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = std::complex<double>(u(gen), u(gen));
    return x;
}

void report(const char* name, double serial_ms, double omp_ms, bool identical) {
    std::printf("%-28s serial %10.4f ms   omp %10.4f ms   speedup %5.2fx   identical %s\n",
                name, serial_ms, omp_ms, serial_ms / omp_ms, identical ? "yes" : "NO");
}

} // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--quick")) quick = true;
        else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc)
            omp_set_num_threads(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: %s [--quick] [--threads K]\n", argv[0]);
            return 2;
        }
    }
    std::printf("threads: %d%s\n", omp_get_max_threads(), quick ? " (quick)" : "");
    bool all_identical = true;

    {
        const int N = quick ? 1000 : 4000;
        const int reps = quick ? 50 : 200;
        const CollectiveOperator H = build_hamiltonian(params(N));
        const Eigen::VectorXcd x = random_vector(N + 1);
        Eigen::VectorXcd ys(N + 1), yp(N + 1);
        const double ts = time_ms(reps, [&] { apply_serial(H, x, ys); });
        const double tp = time_ms(reps, [&] { apply_omp(H, x, yp); });
        const bool same = ys == yp;
        all_identical = all_identical && same;
        char name[64];
        std::snprintf(name, sizeof(name), "tridiagonal apply N=%d", N);
        report(name, ts, tp, same);
    }

    {
        const int N = quick ? 250 : 700;
        const int reps = quick ? 10 : 30;
        const SpectralDecomposition dec = diagonalize(params(N));
        const EigenQfiContext ctx = make_eigen_qfi_context(
            dec, PerturbationAxis::Longitudinal, coherent_state(N, 3.0, 0.2));
        Eigen::VectorXcd ws(N + 1), wp(N + 1);
        const double ts = time_ms(
            reps, [&] { timeavg_generator_apply_serial(ctx.energies, ctx.h1, 13.7, ctx.c, ws); });
        const double tp = time_ms(
            reps, [&] { timeavg_generator_apply_omp(ctx.energies, ctx.h1, 13.7, ctx.c, wp); });
        const bool same = ws == wp;
        all_identical = all_identical && same;
        char name[64];
        std::snprintf(name, sizeof(name), "eigenbasis generator D=%d", N + 1);
        report(name, ts, tp, same);
    }

    {
        const int N = quick ? 40 : 80;
        const int reps = quick ? 10 : 25;
        const LmgParams p = params(N);
        const LindbladStepper st = make_lindblad_stepper(p, 0.2);
        const BlockDensityMatrix rho =
            lindblad_evolve(st, block_from_pure(coherent_state(N, 2.2, 0.7)), 0.5);
        BlockDensityMatrix ds = block_zero(N), dp = block_zero(N);
        const double ts = time_ms(reps, [&] { lindblad_rhs_serial(st, rho, ds); });
        const double tp = time_ms(reps, [&] { lindblad_rhs_omp(st, rho, dp); });
        bool same = true;
        for (int b = 0; b < ds.block_count(); ++b) same = same && ds.blocks[b] == dp.blocks[b];
        all_identical = all_identical && same;
        char name[64];
        std::snprintf(name, sizeof(name), "master-equation rhs N=%d", N);
        report(name, ts, tp, same);
    }

    if (!all_identical) {
        std::fprintf(stderr, "kernel outputs diverged\n");
        return 1;
    }
    return 0;
}
