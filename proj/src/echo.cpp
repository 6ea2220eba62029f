#include "lmg/echo.hpp"

#include "lmg/chebyshev.hpp"
#include "lmg/errors.hpp"
#include "lmg/qfi.hpp"

#include <algorithm>
#include <cmath>

namespace lmg {

namespace {

LmgParams shifted(const LmgParams& p, PerturbationAxis axis, double d) {
    LmgParams q = p;
    if (axis == PerturbationAxis::Transverse)
        q.Omega += d;
    else
        q.omega += d;
    return q;
}

} // namespace

DickeState echo_final_state(const EchoSpec& spec, const DickeState& psi0) {
    const LmgParams fwd = shifted(spec.params, spec.axis, 0.5 * spec.delta);
    const LmgParams bwd = shifted(spec.params, spec.axis, -0.5 * spec.delta);
    const DickeState mid = evolve(build_hamiltonian(fwd), fwd, psi0, spec.t);
    return evolve(build_hamiltonian(bwd), bwd, mid, -spec.t);
}

SensitivityResult observable_sensitivity(const EchoSpec& spec, const DickeState& psi0,
                                         const CollectiveOperator& M,
                                         const std::string& label, double h) {
    if (!(spec.t > 0.0)) throw InvalidParams("sensitivity needs a positive arm time");
    if (h == 0.0)
        h = spec.delta != 0.0
                ? std::abs(spec.delta) / 10.0
                : 1e-3 / (spec.t * std::sqrt(static_cast<double>(spec.params.N)));

    auto mean_at = [&](double d) {
        EchoSpec s = spec;
        s.delta = d;
        return expectation(M, echo_final_state(s, psi0));
    };
    auto slope_at = [&](double hh) {
        return (mean_at(spec.delta + hh) - mean_at(spec.delta - hh)) / (2.0 * hh);
    };

    const double s1 = slope_at(h);
    const double s2 = slope_at(0.5 * h);
    SensitivityResult res;
    res.observable = label;
    res.diagnostics["h"] = h;
    // roundoff in <M> is of order eps*N and the stencil divides it by h
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

    const DickeState at_wp = [&] {
        EchoSpec s = spec;
        return echo_final_state(s, psi0);
    }();
    res.variance = variance(M, at_wp);
    res.variance_at_zero = variance(M, psi0); // delta = 0 restores psi0 exactly
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

TimeMaximum sensitivity_time_maximum(const EchoSpec& spec_template,
                                     const DickeState& psi0,
                                     const CollectiveOperator& M,
                                     const std::string& label,
                                     const std::vector<double>& time_grid) {
    std::map<double, double> cache;
    auto eval = [&](double t) {
        auto hit = cache.find(t);
        if (hit != cache.end()) return hit->second;
        EchoSpec s = spec_template;
        s.t = t;
        const double v = observable_sensitivity(s, psi0, M, label).normalized;
        cache.emplace(t, v);
        return v;
    };
    // Global max over the grid; refine only when it is an interior local
    // maximum. A flat response carries no peak to report.
    double lo = eval(time_grid.front());
    double hi = lo;
    std::size_t best = 0;
    for (std::size_t i = 1; i < time_grid.size(); ++i) {
        const double v = eval(time_grid[i]);
        lo = std::min(lo, v);
        if (v > hi) {
            hi = v;
            best = i;
        }
    }
    if (hi == lo) throw NoPeak("sensitivity is flat over the time grid");
    if (best == 0 || best + 1 == time_grid.size()) return {time_grid[best], hi};
    const std::vector<double> window{time_grid[best - 1], time_grid[best],
                                     time_grid[best + 1]};
    try {
        const PeakResult peak = refine_peak(window, eval);
        return {peak.location, peak.value};
    } catch (const NoPeak&) { // plateau tie at the top
        return {time_grid[best], hi};
    }
}

} // namespace lmg
