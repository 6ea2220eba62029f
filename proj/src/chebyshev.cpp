#include "lmg/chebyshev.hpp"
#include "lmg/bessel.hpp"
#include "lmg/errors.hpp"

#include <cmath>
#include <complex>

namespace lmg {

SpectralBounds spectral_bounds(const LmgParams& p) {
    p.validate();
    const double w = p.N * (p.chi + std::abs(p.omega));
    return {-w, w};
}

SpectralBounds enclosing_bounds(const CollectiveOperator& H) {
    const double r = std::max(1.05 * H.gershgorin_radius(), 1e-12);
    return {-r, r};
}

SpectralBounds propagation_bounds(const LmgParams& p, const CollectiveOperator& H) {
    const double g = H.gershgorin_radius();
    double w = std::max(1.05 * g, 1e-12);
    const double ws = p.N * (p.chi + std::abs(p.omega));
    if (ws >= g && ws < w) w = ws; // model window is certified and tighter
    return {-w, w};
}

namespace {

int required_order(double tau) {
    const double a = std::ceil(1.3 * tau);
    const double b = std::ceil(tau + 12.5 * std::cbrt(tau + 1.0)) + 20.0;
    return static_cast<int>(std::max({a, b, 8.0}));
}

// drop the coefficient tail below double rounding relevance
int trimmed_order(const std::vector<double>& j) {
    int m = static_cast<int>(j.size()) - 1;
    while (m > 0 && 2.0 * std::abs(j[m]) < 1e-18) --m;
    return m;
}

} // namespace

ChebyshevPlan make_plan(const SpectralBounds& bounds, double t_max) {
    if (!(bounds.half_width() > 0.0))
        throw InvalidParams("spectral bounds must have positive width");
    ChebyshevPlan plan;
    plan.bounds = bounds;
    plan.n_cut = required_order(bounds.half_width() * std::abs(t_max));
    return plan;
}

std::vector<DickeState> evolve_grid(const CollectiveOperator& H, const DickeState& state,
                                    const std::vector<double>& times,
                                    const ChebyshevPlan& plan) {
    const int D = H.dim();
    if (state.dim() != D)
        throw DimensionMismatch("propagator state dim");
    if (times.empty()) return {};
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1])
            throw InvalidParams("time grid must be ascending");
    if (times.front() < 0.0 && times.back() > 0.0)
        throw InvalidParams("time grid must not mix signs");

    const double W = plan.bounds.half_width();
    const double c = plan.bounds.center();
    if (!(W > 0.0)) throw InvalidParams("spectral bounds must have positive width");
    const double s = times.front() < 0.0 ? -1.0 : 1.0;
    const double tau_max =
        W * std::max(std::abs(times.front()), std::abs(times.back()));
    if (plan.n_cut < static_cast<int>(std::ceil(1.3 * tau_max)) || plan.n_cut < 1)
        throw InvalidParams("plan truncation order too small for requested times");

    const size_t K = times.size();
    std::vector<std::vector<double>> coef(K);
    int m_max = 0;
    for (size_t k = 0; k < K; ++k) {
        const double tau = W * std::abs(times[k]);
        coef[k] = bessel_jn_array(std::min(plan.n_cut, required_order(tau)), tau);
        const int m = trimmed_order(coef[k]);
        coef[k].resize(m + 1);
        m_max = std::max(m_max, m);
    }

    // phi_0 = psi, phi_1 = -i s Hn psi, phi_{n+1} = -2 i s Hn phi_n + phi_{n-1},
    // Hn = (H - c)/W; U = e^{-ict} [J_0 phi_0 + 2 sum_n J_n(tau) phi_n]
    const std::complex<double> mis(0.0, -s);
    Eigen::VectorXcd prev = state.amp;
    Eigen::VectorXcd w(D), cur(D), next(D);
    std::vector<Eigen::VectorXcd> acc(K);
    for (size_t k = 0; k < K; ++k) acc[k] = coef[k][0] * prev;
    if (m_max >= 1) {
        apply_omp(H, prev, w);
        cur = (mis / W) * (w - c * prev);
        for (size_t k = 0; k < K; ++k)
            if (coef[k].size() > 1) acc[k].noalias() += (2.0 * coef[k][1]) * cur;
    }
    for (int n = 2; n <= m_max; ++n) {
        apply_omp(H, cur, w);
        next = (2.0 * mis / W) * (w - c * cur) + prev;
        for (size_t k = 0; k < K; ++k)
            if (static_cast<int>(coef[k].size()) > n)
                acc[k].noalias() += (2.0 * coef[k][n]) * next;
        prev.swap(cur);
        cur.swap(next);
    }

    const double in_norm = state.norm();
    std::vector<DickeState> out;
    out.reserve(K);
    for (size_t k = 0; k < K; ++k) {
        const std::complex<double> phase =
            std::exp(std::complex<double>(0.0, -c * times[k]));
        DickeState st{state.N, phase * acc[k]};
        const double drift = std::abs(st.norm() - in_norm);
        if (drift > plan.norm_tolerance)
            throw NormDrift("propagation norm drift " + std::to_string(drift) +
                            " at t=" + std::to_string(times[k]));
        out.push_back(std::move(st));
    }
    return out;
}

DickeState chebyshev_evolve(const CollectiveOperator& H, const DickeState& state,
                            double t, const ChebyshevPlan& plan) {
    return evolve_grid(H, state, {t}, plan)[0];
}

DickeState evolve(const CollectiveOperator& H, const LmgParams& p,
                  const DickeState& state, double t) {
    const ChebyshevPlan plan = make_plan(propagation_bounds(p, H), t);
    return chebyshev_evolve(H, state, t, plan);
}

} // namespace lmg
