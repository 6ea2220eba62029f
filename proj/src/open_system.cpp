#include "lmg/open_system.hpp"

#include "lmg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace lmg {
namespace {

using Complex = std::complex<double>;

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c *= static_cast<double>(n - k + i) / i;
    return c;
}

double degeneracy_of(int N, double j) {
    const int k = static_cast<int>(std::lround(0.5 * N - j));
    return binomial(N, k) - binomial(N, k - 1);
}

/// Per-block data for the master-equation right-hand side. The dephasing
/// coefficients follow from permutation symmetry: the multiplicity-space trace
/// of a single-site operator is site-independent, so the whole sum over sites
/// reduces to N times the last-site Clebsch-Gordan block. Gains couple j to
/// j+-1 with branching ratios
///   r_minus(j) = 2j (N/2 + j + 1) / (N (2j + 1)),
///   r_plus(j)  = (2j + 2)(N/2 - j) / (N (2j + 1)),  r_minus + r_plus = 1.
struct BlockPlan {
    int dim = 0;
    double j = 0.0;
    Eigen::VectorXd hdiag, hoff; // tridiagonal H restricted to the sector
    Eigen::VectorXd m;           // ladder values -j .. j
    Eigen::VectorXd up_amp;      // sqrt((j+1)^2 - m^2), gain from sector j+1
    Eigen::VectorXd dn_amp;      // sqrt(j^2 - m^2),     gain from sector j-1
    double u = 0.0;              // N r_plus / (j+1)^2
    double l = 0.0;              // N r_minus / j^2
};

struct RhsPlan {
    int N = 0;
    double gamma = 0.0;
    std::vector<BlockPlan> blocks;
};

RhsPlan make_plan(const LmgParams& p, double gamma, double h_sign) {
    RhsPlan plan;
    plan.N = p.N;
    plan.gamma = gamma;
    const int nb = p.N / 2 + 1;
    plan.blocks.resize(nb);
    for (int b = 0; b < nb; ++b) {
        BlockPlan& bp = plan.blocks[b];
        bp.dim = p.N + 1 - 2 * b;
        bp.j = 0.5 * p.N - b;
        const double j = bp.j;
        bp.m.resize(bp.dim);
        bp.hdiag.resize(bp.dim);
        bp.up_amp.resize(bp.dim);
        bp.dn_amp.resize(bp.dim);
        for (int k = 0; k < bp.dim; ++k) {
            const double m = k - j;
            bp.m[k] = m;
            bp.hdiag[k] = h_sign * (-(p.chi / p.N) * m * m - p.omega * m);
            bp.up_amp[k] = std::sqrt((j + 1.0) * (j + 1.0) - m * m);
            bp.dn_amp[k] = std::sqrt(std::max(0.0, j * j - m * m));
        }
        const CollectiveOperator sx = spin_x(bp.dim - 1);
        bp.hoff = h_sign * -p.Omega * sx.off;
        const double r_minus = 2.0 * j * (0.5 * p.N + j + 1.0) / (p.N * (2.0 * j + 1.0));
        const double r_plus = (2.0 * j + 2.0) * (0.5 * p.N - j) / (p.N * (2.0 * j + 1.0));
        bp.u = p.N * r_plus / ((j + 1.0) * (j + 1.0));
        bp.l = j > 0.25 ? p.N * r_minus / (j * j) : 0.0;
    }
    return plan;
}

/// One output block of -i[H, rho] + (Gamma/4)(sum_n sigma_z^n rho sigma_z^n - N rho).
void rhs_block(const RhsPlan& plan, const BlockDensityMatrix& rho, int b,
               Eigen::MatrixXcd& out) {
    const BlockPlan& bp = plan.blocks[b];
    const int d = bp.dim;
    const Eigen::MatrixXcd& r0 = rho.blocks[b];
    const Complex mi(0.0, -1.0);
    const double g4 = 0.25 * plan.gamma;
    const bool has_up = g4 > 0.0 && b > 0;
    const bool has_dn = g4 > 0.0 && b + 1 < static_cast<int>(plan.blocks.size());
    const double loss = bp.u + bp.l;
    out.resize(d, d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            Complex hro = bp.hdiag[r] * r0(r, c);
            if (r > 0) hro += bp.hoff[r - 1] * r0(r - 1, c);
            if (r < d - 1) hro += bp.hoff[r] * r0(r + 1, c);
            Complex roh = r0(r, c) * bp.hdiag[c];
            if (c > 0) roh += r0(r, c - 1) * bp.hoff[c - 1];
            if (c < d - 1) roh += r0(r, c + 1) * bp.hoff[c];
            Complex acc = mi * (hro - roh);
            if (g4 > 0.0) {
                acc += g4 * (loss * bp.m[r] * bp.m[c] - plan.N) * r0(r, c);
                if (has_up)
                    acc += g4 * bp.u * bp.up_amp[r] * bp.up_amp[c] *
                           rho.blocks[b - 1](r + 1, c + 1);
                if (has_dn && r >= 1 && r <= d - 2 && c >= 1 && c <= d - 2)
                    acc += g4 * bp.l * bp.dn_amp[r] * bp.dn_amp[c] *
                           rho.blocks[b + 1](r - 1, c - 1);
            }
            out(r, c) = acc;
        }
    }
}

void rhs_all(const RhsPlan& plan, const BlockDensityMatrix& rho,
             BlockDensityMatrix& out, int active, bool parallel) {
    out.N = rho.N;
    out.blocks.resize(rho.blocks.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int b = 0; b < active; ++b) rhs_block(plan, rho, b, out.blocks[b]);
    } else {
        for (int b = 0; b < active; ++b) rhs_block(plan, rho, b, out.blocks[b]);
    }
    for (int b = active; b < static_cast<int>(rho.blocks.size()); ++b)
        out.blocks[b].setZero(rho.dim_of(b), rho.dim_of(b));
}

double hamiltonian_radius(const LmgParams& p) {
    return build_hamiltonian(p).gershgorin_radius();
}

void check_stepper(const LindbladStepper& stepper) {
    if (stepper.gamma < 0.0) throw InvalidParams("dephasing rate must be >= 0");
    if (!(stepper.dt > 0.0)) throw InvalidParams("stepper dt must be positive");
    if (stepper.order != 4) throw InvalidParams("only the order-4 stepper is implemented");
    const double scale = hamiltonian_radius(stepper.params) +
                         stepper.gamma * stepper.params.N;
    if (stepper.dt * scale > 0.1 + 1e-12)
        throw InvalidParams("dt exceeds the stability budget dt (||H|| + Gamma N) <= 0.1");
}

int active_blocks(const RhsPlan& plan, const BlockDensityMatrix& rho) {
    if (plan.gamma > 0.0) return rho.block_count();
    int last = 0;
    for (int b = 0; b < rho.block_count(); ++b)
        if (rho.blocks[b].squaredNorm() > 0.0) last = b;
    return last + 1;
}

void axpy(BlockDensityMatrix& y, double a, const BlockDensityMatrix& x, int active) {
    for (int b = 0; b < active; ++b) y.blocks[b] += a * x.blocks[b];
}

void validate_state(const BlockDensityMatrix& rho, double trace0) {
    if (std::abs(rho.trace() - trace0) > 1e-7)
        throw TraceDrift("block trace drifted beyond 1e-7");
    for (int b = 0; b < rho.block_count(); ++b) {
        if (rho.blocks[b].squaredNorm() == 0.0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.blocks[b],
                                                           Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw PositivityViolation("block eigenvalue below -1e-8");
    }
}

/// RK4 loop shared by every open-system entry point. step_cb runs after each
/// step with the current time.
template <typename Callback>
BlockDensityMatrix integrate(const LindbladStepper& stepper,
                             const BlockDensityMatrix& rho0, double t,
                             Callback&& step_cb) {
    check_stepper(stepper);
    if (rho0.N != stepper.params.N) throw DimensionMismatch("state size vs params");
    const RhsPlan plan = make_plan(stepper.params, stepper.gamma,
                                   stepper.reverse_hamiltonian ? -1.0 : 1.0);
    BlockDensityMatrix y = rho0;
    if (t == 0.0) return y;
    const double trace0 = rho0.trace();
    const int active = active_blocks(plan, rho0);
    const int steps = std::max(1, static_cast<int>(std::ceil(t / stepper.dt - 1e-12)));
    const double dt = t / steps;
    BlockDensityMatrix k1, k2, k3, k4, tmp;
    for (int s = 0; s < steps; ++s) {
        rhs_all(plan, y, k1, active, true);
        tmp = y;
        axpy(tmp, 0.5 * dt, k1, active);
        rhs_all(plan, tmp, k2, active, true);
        tmp = y;
        axpy(tmp, 0.5 * dt, k2, active);
        rhs_all(plan, tmp, k3, active, true);
        tmp = y;
        axpy(tmp, dt, k3, active);
        rhs_all(plan, tmp, k4, active, true);
        for (int b = 0; b < active; ++b)
            y.blocks[b] += (dt / 6.0) * (k1.blocks[b] + 2.0 * k2.blocks[b] +
                                         2.0 * k3.blocks[b] + k4.blocks[b]);
        if ((s & 255) == 255 && std::abs(y.trace() - trace0) > 1e-7)
            throw TraceDrift("block trace drifted beyond 1e-7");
        step_cb((s + 1) * dt, y);
    }
    validate_state(y, trace0);
    return y;
}

Eigen::MatrixXcd dense_operator(const CollectiveOperator& op) {
    const int d = op.dim();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) M(k, k) = op.diag[k];
    for (int k = 0; k + 1 < d; ++k) {
        if (op.anti) {
            M(k, k + 1) = Complex(0.0, op.off[k]);
            M(k + 1, k) = Complex(0.0, -op.off[k]);
        } else {
            M(k, k + 1) = op.off[k];
            M(k + 1, k) = op.off[k];
        }
    }
    return M;
}

Moment base_moment(Moment which) {
    switch (which) {
        case Moment::Sx2: return Moment::Sx;
        case Moment::Sy2: return Moment::Sy;
        case Moment::Sz2: return Moment::Sz;
        default: return which;
    }
}

bool is_squared(Moment which) {
    return which == Moment::Sx2 || which == Moment::Sy2 || which == Moment::Sz2;
}

CollectiveOperator block_operator(Moment which, int n) {
    switch (base_moment(which)) {
        case Moment::Sx: return spin_x(n);
        case Moment::Sy: return spin_y(n);
        default: return spin_z(n);
    }
}

double block_sz(const BlockDensityMatrix& rho) {
    double acc = 0.0;
    for (int b = 0; b < rho.block_count(); ++b) {
        if (rho.blocks[b].squaredNorm() == 0.0) continue;
        const double j = rho.j_of(b);
        double tr = 0.0;
        for (int k = 0; k < rho.dim_of(b); ++k)
            tr += (k - j) * rho.blocks[b](k, k).real();
        acc += rho.degeneracy(b) * tr;
    }
    return acc;
}

/// RK4 is not a completely positive map: closed-system runs accumulate
/// eigenvalue dust ~ T budget^4 (measured -1e-6 at budget 0.1 over chi T =
/// 100, N = 50), while dephasing at Gamma >= 0.01 damps it below 1e-18. Keep
/// the dust under the -1e-8 positivity gate with a tighter closed-run budget.
double auto_budget(double gamma, double total_time) {
    if (gamma >= 0.01) return 0.1;
    return 0.02 / std::pow(std::max(1.0, total_time / 100.0), 0.25);
}

LmgParams shifted(const LmgParams& p, PerturbationAxis axis, double d) {
    LmgParams q = p;
    if (axis == PerturbationAxis::Transverse)
        q.Omega += d;
    else
        q.omega += d;
    return q;
}

} // namespace

double BlockDensityMatrix::degeneracy(int b) const { return degeneracy_of(N, j_of(b)); }

double BlockDensityMatrix::trace() const {
    double acc = 0.0;
    for (int b = 0; b < block_count(); ++b)
        acc += degeneracy(b) * blocks[b].trace().real();
    return acc;
}

std::size_t BlockDensityMatrix::stored_entries() const {
    std::size_t acc = 0;
    for (const auto& blk : blocks) acc += static_cast<std::size_t>(blk.size());
    return acc;
}

BlockDensityMatrix block_zero(int N) {
    if (N < 1) throw InvalidParams("need at least one spin");
    BlockDensityMatrix rho;
    rho.N = N;
    rho.blocks.resize(N / 2 + 1);
    for (int b = 0; b < rho.block_count(); ++b)
        rho.blocks[b].setZero(rho.dim_of(b), rho.dim_of(b));
    return rho;
}

BlockDensityMatrix block_from_pure(const DickeState& psi) {
    BlockDensityMatrix rho = block_zero(psi.N);
    rho.blocks[0] = psi.amp * psi.amp.adjoint();
    return rho;
}

double collective_moment(const BlockDensityMatrix& rho, Moment which) {
    double acc = 0.0;
    for (int b = 0; b < rho.block_count(); ++b) {
        if (rho.blocks[b].squaredNorm() == 0.0) continue;
        const Eigen::MatrixXcd M = dense_operator(block_operator(which, rho.dim_of(b) - 1));
        const Eigen::MatrixXcd prod =
            is_squared(which) ? Eigen::MatrixXcd(rho.blocks[b] * M * M)
                              : Eigen::MatrixXcd(rho.blocks[b] * M);
        acc += rho.degeneracy(b) * prod.trace().real();
    }
    return acc;
}

LindbladStepper make_lindblad_stepper(const LmgParams& p, double gamma, double budget) {
    if (gamma < 0.0) throw InvalidParams("dephasing rate must be >= 0");
    if (!(budget > 0.0) || budget > 0.1 + 1e-12)
        throw InvalidParams("step budget must lie in (0, 0.1]");
    LindbladStepper st;
    st.params = p;
    st.gamma = gamma;
    const double scale = hamiltonian_radius(p) + gamma * p.N;
    st.dt = scale > 0.0 ? budget / scale : 1e-2;
    return st;
}

void lindblad_rhs_serial(const LindbladStepper& stepper, const BlockDensityMatrix& rho,
                         BlockDensityMatrix& out) {
    const RhsPlan plan = make_plan(stepper.params, stepper.gamma,
                                   stepper.reverse_hamiltonian ? -1.0 : 1.0);
    rhs_all(plan, rho, out, rho.block_count(), false);
}

void lindblad_rhs_omp(const LindbladStepper& stepper, const BlockDensityMatrix& rho,
                      BlockDensityMatrix& out) {
    const RhsPlan plan = make_plan(stepper.params, stepper.gamma,
                                   stepper.reverse_hamiltonian ? -1.0 : 1.0);
    rhs_all(plan, rho, out, rho.block_count(), true);
}

BlockDensityMatrix lindblad_evolve(const LindbladStepper& stepper,
                                   const BlockDensityMatrix& rho0, double t) {
    if (t < 0.0) throw InvalidParams("open-system evolution needs t >= 0");
    return integrate(stepper, rho0, t, [](double, const BlockDensityMatrix&) {});
}

BlockDensityMatrix open_echo_final_state(const OpenEchoSpec& spec,
                                         const DickeState& psi0) {
    if (spec.step_budget < 0.0 || spec.step_budget > 0.1 + 1e-12)
        throw InvalidParams("step budget must lie in [0, 0.1]");
    if (spec.backward_gamma_scale < 0.0)
        throw InvalidParams("backward gamma scale must be >= 0");
    const LmgParams fwd = shifted(spec.params, spec.axis, +0.5 * spec.delta);
    const LmgParams bwd = shifted(spec.params, spec.axis, -0.5 * spec.delta);
    const double gamma_back = spec.gamma * spec.backward_gamma_scale;
    const double budget =
        spec.step_budget > 0.0
            ? spec.step_budget
            : auto_budget(std::min(spec.gamma, gamma_back), 2.0 * spec.t);
    const BlockDensityMatrix mid =
        lindblad_evolve(make_lindblad_stepper(fwd, spec.gamma, budget),
                        block_from_pure(psi0), spec.t);
    LindbladStepper back = make_lindblad_stepper(bwd, gamma_back, budget);
    back.reverse_hamiltonian = true;
    return lindblad_evolve(back, mid, spec.t);
}

SensitivityResult open_echo_sensitivity(const OpenEchoSpec& spec,
                                        const DickeState& psi0, Moment observable,
                                        const std::string& label, double h) {
    if (!(spec.t > 0.0)) throw InvalidParams("sensitivity needs a positive arm time");
    if (is_squared(observable))
        throw InvalidParams("observable must be a first moment");
    if (h == 0.0)
        h = spec.delta != 0.0
                ? std::abs(spec.delta) / 10.0
                : 1e-3 / (spec.t * std::sqrt(static_cast<double>(spec.params.N)));

    const Moment squared = observable == Moment::Sx   ? Moment::Sx2
                           : observable == Moment::Sy ? Moment::Sy2
                                                      : Moment::Sz2;
    auto final_at = [&](double d) {
        OpenEchoSpec s = spec;
        s.delta = d;
        return open_echo_final_state(s, psi0);
    };
    auto mean_at = [&](double d) { return collective_moment(final_at(d), observable); };
    auto slope_at = [&](double hh) {
        return (mean_at(spec.delta + hh) - mean_at(spec.delta - hh)) / (2.0 * hh);
    };

    const double s1 = slope_at(h);
    const double s2 = slope_at(0.5 * h);
    SensitivityResult res;
    res.observable = label;
    res.diagnostics["h"] = h;
    const double noise = 1e-12 * spec.params.N * (1.0 + 1.0 / h);
    if (std::max(std::abs(s1), std::abs(s2)) < noise) {
        res.slope = 0.0;
        res.diagnostics["richardson_rel"] = 0.0;
    } else {
        const double rel = std::abs(s1 - s2) / std::max(std::abs(s2), 1e-300);
        res.diagnostics["richardson_rel"] = rel;
        if (rel > 0.01)
            throw StepNotConverged("slope stencil disagreement " + std::to_string(rel));
        res.slope = s2;
    }

    const BlockDensityMatrix at_wp = final_at(spec.delta);
    const double mean_wp = collective_moment(at_wp, observable);
    res.variance = collective_moment(at_wp, squared) - mean_wp * mean_wp;
    if (spec.delta == 0.0) {
        res.variance_at_zero = res.variance;
    } else {
        const BlockDensityMatrix at_zero = final_at(0.0);
        const double mean_zero = collective_moment(at_zero, observable);
        res.variance_at_zero =
            collective_moment(at_zero, squared) - mean_zero * mean_zero;
    }
    res.variance_discrepancy =
        std::abs(res.variance - res.variance_at_zero) >
        0.05 * std::max(res.variance_at_zero, 1e-300);

    const double floor = 1e-12 * static_cast<double>(spec.params.N) * spec.params.N;
    if (res.variance < floor)
        throw ZeroVariance("observable is deterministic on the echo state");

    res.inverse_variance = res.slope * res.slope / res.variance;
    res.normalized = res.inverse_variance / (spec.params.N * spec.t * spec.t);
    return res;
}

double open_order_parameter(const LmgParams& p, double gamma, const DickeState& psi0,
                            double T) {
    if (!(T > 0.0)) throw InvalidParams("averaging window must be positive");
    const LindbladStepper stepper = make_lindblad_stepper(p, gamma, auto_budget(gamma, T));
    const BlockDensityMatrix rho0 = block_from_pure(psi0);
    double acc = 0.0;
    double prev_t = 0.0;
    double prev_sz = block_sz(rho0);
    integrate(stepper, rho0, T, [&](double t, const BlockDensityMatrix& rho) {
        const double sz = block_sz(rho);
        acc += 0.5 * (sz + prev_sz) * (t - prev_t);
        prev_t = t;
        prev_sz = sz;
    });
    return acc / prev_t;
}

} // namespace lmg
