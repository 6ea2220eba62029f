#include "lmg/qfi.hpp"
#include "lmg/chebyshev.hpp"
#include "lmg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace lmg {

using std::complex;

const char* method_name(QfiMethod m) {
    switch (m) {
        case QfiMethod::EchoFD: return "echo_fd";
        case QfiMethod::ExactEigen: return "exact_eigen";
        case QfiMethod::Secular: return "secular";
        case QfiMethod::ShortTime: return "short_time";
    }
    return "unknown";
}

namespace {

LmgParams shifted(const LmgParams& p, PerturbationAxis axis, double delta) {
    LmgParams q = p;
    if (axis == PerturbationAxis::Transverse)
        q.Omega += delta;
    else
        q.omega += delta;
    return q;
}

double overlap_with(const DickeState& a, const DickeState& b) {
    return std::abs(a.amp.dot(b.amp));
}

} // namespace

double loschmidt_echo(const LmgParams& p, double delta, PerturbationAxis axis,
                      double t, const DickeState& psi0) {
    const DickeState base = evolve(build_hamiltonian(p), p, psi0, t);
    const LmgParams q = shifted(p, axis, delta);
    const DickeState pert = evolve(build_hamiltonian(q), q, psi0, t);
    return overlap_with(base, pert);
}

QfiResult qfi_finite_difference(const LmgParams& p, PerturbationAxis axis, double t,
                                const DickeState& psi0) {
    QfiResult res;
    res.method = QfiMethod::EchoFD;
    if (t == 0.0) return res;
    if (t < 0.0) throw InvalidParams("echo curvature needs t >= 0");

    const DickeState base = evolve(build_hamiltonian(p), p, psi0, t);
    std::map<double, double> cache;
    auto fid = [&](double d) {
        auto it = cache.find(d);
        if (it != cache.end()) return it->second;
        const LmgParams q = shifted(p, axis, d);
        const DickeState pert = evolve(build_hamiltonian(q), q, psi0, t);
        const double f = overlap_with(base, pert);
        cache.emplace(d, f);
        return f;
    };

    // Land the infidelity inside [1e-8, 1e-2]. Growth is deliberately gentle:
    // a large jump can leap over the quadratic lobe into the saturated region
    // where the curvature read-off is meaningless.
    double delta = 1e-3 / (t * std::sqrt(static_cast<double>(p.N)));
    double infid = 1.0 - fid(delta);
    int iters = 0, flat = 0;
    while (infid < 1e-8 || infid > 1e-2) {
        if (++iters > 12)
            throw StepNotConverged("echo step stuck outside the perturbative window, "
                                   "infidelity " + std::to_string(infid));
        if (infid <= 0.0) {
            if (++flat >= 3) { // overlap pinned at 1: zero sensitivity
                res.diagnostics["flat_echo"] = 1.0;
                return res;
            }
            delta *= 30.0;
        } else {
            const double f = std::sqrt(1e-6 / infid);
            delta *= std::clamp(f, 0.01, 30.0);
        }
        infid = 1.0 - fid(delta);
    }

    auto estimate = [&](double d) {
        return -4.0 * (fid(d) + fid(-d) - 2.0) / (d * d);
    };

    // Halve the step until the half-step estimate is stable to 1%. A failing
    // pair means delta still probes beyond linear response; give up only once
    // the window floor leaves no room below.
    double f1 = 0.0, f2 = 0.0, rel = 0.0;
    bool ok = false;
    int halvings = 0;
    for (; halvings < 10; ++halvings) {
        f1 = estimate(delta);
        f2 = estimate(0.5 * delta);
        rel = std::abs(f1 - f2) / std::max(std::abs(f2), 1e-300);
        if ((f1 == 0.0 && f2 == 0.0) || rel <= 0.01) {
            ok = true;
            break;
        }
        infid = 1.0 - fid(0.5 * delta);
        if (infid < 1e-8) break;
        delta *= 0.5;
    }
    if (!ok)
        throw StepNotConverged("echo curvature Richardson disagreement " +
                               std::to_string(rel));

    res.value = std::max(0.0, f2);
    res.normalized = res.value / (p.N * t * t);
    res.diagnostics["delta"] = delta;
    res.diagnostics["infidelity"] = 1.0 - fid(delta);
    res.diagnostics["richardson_rel"] = rel;
    res.diagnostics["iterations"] = iters;
    res.diagnostics["halvings"] = halvings;
    res.diagnostics["estimate_at_delta"] = f1;
    return res;
}

void timeavg_generator_apply_serial(const Eigen::VectorXd& energies,
                                    const Eigen::MatrixXd& h1, double t,
                                    const Eigen::VectorXcd& c, Eigen::VectorXcd& w) {
    const int D = static_cast<int>(energies.size());
    Eigen::VectorXcd u(D);
    for (int n = 0; n < D; ++n)
        u[n] = std::exp(complex<double>(0.0, 0.5 * energies[n] * t));
    w.resize(D);
    for (int n = 0; n < D; ++n) {
        complex<double> acc(0.0, 0.0);
        const auto col = h1.col(n); // h1 symmetric: col n is row n
        for (int m = 0; m < D; ++m) {
            const complex<double> z = u[n] * std::conj(u[m]);
            const double x = 0.5 * (energies[n] - energies[m]) * t;
            const double s = std::abs(x) < 1e-6 ? 1.0 - x * x / 6.0 : z.imag() / x;
            acc += col[m] * s * z * c[m];
        }
        w[n] = acc;
    }
}

void timeavg_generator_apply_omp(const Eigen::VectorXd& energies,
                                 const Eigen::MatrixXd& h1, double t,
                                 const Eigen::VectorXcd& c, Eigen::VectorXcd& w) {
    const int D = static_cast<int>(energies.size());
    Eigen::VectorXcd u(D);
    for (int n = 0; n < D; ++n)
        u[n] = std::exp(complex<double>(0.0, 0.5 * energies[n] * t));
    w.resize(D);
#pragma omp parallel for schedule(static)
    for (int n = 0; n < D; ++n) {
        complex<double> acc(0.0, 0.0);
        const auto col = h1.col(n);
        for (int m = 0; m < D; ++m) {
            const complex<double> z = u[n] * std::conj(u[m]);
            const double x = 0.5 * (energies[n] - energies[m]) * t;
            const double s = std::abs(x) < 1e-6 ? 1.0 - x * x / 6.0 : z.imag() / x;
            acc += col[m] * s * z * c[m];
        }
        w[n] = acc;
    }
}

double EigenQfiContext::qfi_at(double t) const {
    Eigen::VectorXcd w;
    timeavg_generator_apply_omp(energies, h1, t, c, w);
    const complex<double> mean = c.dot(w);
    // variance as a squared distance; avoids |w|^2 - |mean|^2 cancellation
    const double var = (w - mean * c).squaredNorm();
    return 4.0 * t * t * var;
}

double EigenQfiContext::secular_coefficient() const {
    const int D = static_cast<int>(energies.size());
    double mean = 0.0;
    for (int n = 0; n < D; ++n) mean += std::norm(c[n]) * h1(n, n);
    double var = 0.0;
    for (int n = 0; n < D; ++n) {
        const double d = h1(n, n) - mean;
        var += std::norm(c[n]) * d * d;
    }
    return var;
}

EigenQfiContext make_eigen_qfi_context(const SpectralDecomposition& dec,
                                       PerturbationAxis axis, const DickeState& psi0) {
    const int D = dec.dim();
    if (psi0.dim() != D) throw DimensionMismatch("context state dim");
    const CollectiveOperator H1 = perturbation_operator(dec.params.N, axis);

    EigenQfiContext ctx;
    ctx.N = dec.params.N;
    ctx.energies = dec.energies;

    Eigen::MatrixXd HV = H1.diag.asDiagonal() * dec.vectors;
    if (H1.off.size() > 0 && H1.off.cwiseAbs().maxCoeff() > 0.0) {
        HV.topRows(D - 1) += H1.off.asDiagonal() * dec.vectors.bottomRows(D - 1);
        HV.bottomRows(D - 1) += H1.off.asDiagonal() * dec.vectors.topRows(D - 1);
    }
    ctx.h1.noalias() = dec.vectors.transpose() * HV;
    ctx.c = dec.vectors.transpose() * psi0.amp;
    return ctx;
}

QfiResult qfi_exact_eigenbasis(const SpectralDecomposition& dec, PerturbationAxis axis,
                               double t, const DickeState& psi0) {
    const EigenQfiContext ctx = make_eigen_qfi_context(dec, axis, psi0);
    QfiResult res;
    res.method = QfiMethod::ExactEigen;
    res.value = ctx.qfi_at(t);
    res.normalized = t > 0.0 ? res.value / (dec.params.N * t * t) : 0.0;
    return res;
}

SecularCoefficient qfi_secular(const SpectralDecomposition& dec, PerturbationAxis axis,
                               const DickeState& psi0) {
    const int D = dec.dim();
    if (psi0.dim() != D) throw DimensionMismatch("secular state dim");
    const CollectiveOperator H1 = perturbation_operator(dec.params.N, axis);

    const Eigen::VectorXcd c = dec.vectors.transpose() * psi0.amp;
    Eigen::VectorXd h(D);
    for (int n = 0; n < D; ++n) {
        const auto v = dec.vectors.col(n);
        double hn = 0.0;
        for (int k = 0; k < D; ++k) hn += H1.diag[k] * v[k] * v[k];
        for (int k = 0; k + 1 < D; ++k) hn += 2.0 * H1.off[k] * v[k] * v[k + 1];
        h[n] = hn;
    }

    double mean = 0.0;
    for (int n = 0; n < D; ++n) mean += std::norm(c[n]) * h[n];
    double var = 0.0;
    for (int n = 0; n < D; ++n) {
        const double d = h[n] - mean;
        var += std::norm(c[n]) * d * d;
    }

    SecularCoefficient out;
    out.value = var;
    const double span = dec.energies[D - 1] - dec.energies[0];
    for (int n = 0; n + 1 < D; ++n) {
        if (dec.energies[n + 1] - dec.energies[n] < 1e-10 * span) {
            out.degenerate_warning = true;
            break;
        }
    }
    return out;
}

QfiResult qfi_short_time(const LmgParams& p, PerturbationAxis axis, double t) {
    QfiResult res;
    res.method = QfiMethod::ShortTime;
    if (axis == PerturbationAxis::Transverse)
        res.value = p.N * t * t;
    else
        res.value = p.Omega * p.Omega * p.N * std::pow(t, 4) / 4.0;
    res.normalized = t > 0.0 ? res.value / (p.N * t * t) : 0.0;
    return res;
}

PeakResult refine_peak(const std::vector<double>& grid,
                       const std::function<double(double)>& eval) {
    if (grid.size() < 3) throw InvalidParams("peak search needs >= 3 grid points");
    for (size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw InvalidParams("field grid must be ascending");

    const int n = static_cast<int>(grid.size());
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = eval(grid[i]);

    PeakResult out;
    for (int i = 1; i + 1 < n; ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) out.local_max_indices.push_back(i);
    if (out.local_max_indices.empty())
        throw NoPeak("response is monotone over the grid");

    int best = out.local_max_indices[0];
    for (int i : out.local_max_indices)
        if (y[i] > y[best]) best = i;
    out.grid_index = best;

    // parabola through three non-uniform points
    const double x0 = grid[best - 1], x1 = grid[best], x2 = grid[best + 1];
    const double y0 = y[best - 1], y1 = y[best], y2 = y[best + 1];
    const double num = (y0 - y1) * (x2 - x1) * (x2 - x1) -
                       (y2 - y1) * (x1 - x0) * (x1 - x0);
    const double den = (y0 - y1) * (x2 - x1) + (y2 - y1) * (x1 - x0);
    double xs = x1;
    if (std::abs(den) > 1e-300) xs = x1 + 0.5 * num / den;
    xs = std::clamp(xs, x0, x2);

    double ys = eval(xs);
    if (ys < y1) { // refinement did not improve; keep the grid point
        xs = x1;
        ys = y1;
    }
    out.location = xs;
    out.value = ys;
    return out;
}

PeakResult find_critical_field(const LmgParams& base, PerturbationAxis axis,
                               SweptField swept, double t, const DickeState& psi0,
                               const std::vector<double>& grid, QfiMethod method) {
    auto with_field = [&](double v) {
        LmgParams q = base;
        if (swept == SweptField::TransverseField)
            q.Omega = v;
        else
            q.omega = v;
        return q;
    };
    auto eval = [&](double v) {
        const LmgParams q = with_field(v);
        switch (method) {
            case QfiMethod::EchoFD:
                return qfi_finite_difference(q, axis, t, psi0).value;
            case QfiMethod::ExactEigen:
                return qfi_exact_eigenbasis(diagonalize(q), axis, t, psi0).value;
            case QfiMethod::Secular:
                return 4.0 * t * t * qfi_secular(diagonalize(q), axis, psi0).value;
            case QfiMethod::ShortTime:
                return qfi_short_time(q, axis, t).value;
        }
        return 0.0;
    };
    return refine_peak(grid, eval);
}

PowerFit scaling_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4)
        throw InsufficientPoints("power-law scaling fit needs >= 4 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [N, v] : points) {
        if (!(N > 0.0) || !(v > 0.0))
            throw NonPositiveValue("scaling fit needs positive sizes and values");
        const double lx = std::log(N), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(points.size());
    const double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-300) throw InvalidParams("degenerate size grid");
    PowerFit fit;
    fit.b = (n * sxy - sx * sy) / den;
    const double la = (sy - fit.b * sx) / n;
    fit.a = std::exp(la);
    double ss = 0.0;
    for (const auto& [N, v] : points) {
        const double r = std::log(v) - (la + fit.b * std::log(N));
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

} // namespace lmg
