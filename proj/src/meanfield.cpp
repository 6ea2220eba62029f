#include "lmg/meanfield.hpp"
#include "lmg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace lmg {

using Eigen::Matrix3d;
using Eigen::Vector3d;

double initial_energy_per_spin(double theta, double phi, const LmgParams& p) {
    const double ct = std::cos(theta), st = std::sin(theta);
    return -0.5 * (0.5 * p.chi * ct * ct + p.Omega * st * std::cos(phi) +
                   p.omega * ct);
}

double energy_per_spin(const BlochVector& u, const LmgParams& p) {
    return -0.25 * p.chi * u.sz * u.sz - 0.5 * p.Omega * u.sx - 0.5 * p.omega * u.sz;
}

double effective_potential(double sz, const LmgParams& p, double E) {
    const double q = E + p.chi * sz * sz / p.N + p.omega * sz;
    return 0.5 * q * q + 0.5 * p.Omega * p.Omega * sz * sz -
           p.Omega * p.Omega * p.N * p.N / 8.0;
}

CriticalFieldPair critical_field_analytic(double theta, double phi) {
    const double c2 = std::cos(theta) * std::cos(theta);
    const double sc = std::sin(theta) * std::cos(phi);
    CriticalFieldPair out;
    if (std::abs(1.0 - sc) < 1e-12) {
        out.plus_valid = false;
    } else {
        out.plus = 0.5 * c2 / (1.0 - sc);
    }
    if (std::abs(1.0 + sc) < 1e-12) {
        out.minus_valid = false;
    } else {
        out.minus = -0.5 * c2 / (1.0 + sc);
    }
    return out;
}

double critical_field_longitudinal(double omega, double chi) {
    if (!(chi > 0.0)) throw InvalidParams("chi must be positive");
    const double r = omega / chi;
    // the sharp transition terminates at the endpoint r = -1/8 itself
    if (r <= -0.125)
        throw CrossoverRegime("no sharp boundary for omega/chi at or below -1/8");
    const double inner = 2.0 * (1.0 - r) * (1.0 + 2.0 * r) -
                         1.5 * (8.0 * r + 1.0) +
                         0.5 * std::pow(1.0 + 8.0 * r, 1.5);
    if (inner < 0.0)
        throw CrossoverRegime("no real critical field at this longitudinal field");
    return 0.5 * chi * std::sqrt(inner);
}

namespace {

double potential_slope(double sz, const LmgParams& p, double E) {
    const double q = E + p.chi * sz * sz / p.N + p.omega * sz;
    return q * (2.0 * p.chi * sz / p.N + p.omega) + p.Omega * p.Omega * sz;
}

// Interior local maximum of the quartic V_eff on (-N/2, N/2), if any.
// The quartic opens upward, so there is at most one barrier top.
std::optional<std::pair<double, double>> barrier_top(const LmgParams& p, double E) {
    const double half = 0.5 * p.N;
    const int M = 400;
    const double h = 2.0 * half / M;
    double prev = effective_potential(-half, p, E);
    double cur = effective_potential(-half + h, p, E);
    for (int i = 1; i + 1 <= M; ++i) {
        const double next = effective_potential(-half + (i + 1) * h, p, E);
        if (cur > prev && cur >= next) {
            double lo = -half + (i - 1) * h, hi = -half + (i + 1) * h;
            for (int it = 0; it < 80; ++it) { // slope changes + to - across the top
                const double mid = 0.5 * (lo + hi);
                if (potential_slope(mid, p, E) > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            const double sz = 0.5 * (lo + hi);
            return std::make_pair(sz, effective_potential(sz, p, E));
        }
        prev = cur;
        cur = next;
    }
    return std::nullopt;
}

std::optional<std::pair<double, double>> barrier_at(double theta, double phi,
                                                    const LmgParams& p) {
    const double E = p.N * initial_energy_per_spin(theta, phi, p);
    return barrier_top(p, E);
}

} // namespace

bool barrier_blocks(double theta, double phi, const LmgParams& p) {
    const auto top = barrier_at(theta, phi, p);
    return top && top->second > 0.0;
}

double phase_boundary_numeric(double theta, double phi, double omega,
                              const LmgParams& p) {
    LmgParams q = p;
    q.omega = omega;

    // barrier height seen by the zero-energy particle; melted barrier counts
    // as passable
    auto gap = [&](double Om) {
        q.Omega = Om;
        const auto top = barrier_at(theta, phi, q);
        return top ? top->second : -1.0;
    };

    double lo = 1e-9 * q.chi;
    if (gap(lo) <= 0.0)
        throw NoBarrier("no confining barrier even at vanishing drive");
    double hi = q.chi;
    int grow = 0;
    while (gap(hi) > 0.0) {
        hi *= 2.0;
        if (++grow > 40) throw NoBarrier("barrier persists for all drives");
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-9 * hi) break;
    }
    const double om_cr = 0.5 * (lo + hi);

    // A genuine boundary has the turning point meeting the barrier top; in the
    // crossover regime the wells merge while the barrier is still finite.
    q.Omega = std::max(om_cr * (1.0 - 1e-6), lo);
    const auto top = barrier_at(theta, phi, q);
    const double scale = q.chi * q.chi * q.N * q.N;
    if (!top || top->second > 1e-5 * scale)
        throw NoBarrier("wells merge before the turning point reaches the top");
    return om_cr;
}

namespace {

Vector3d field_at(const Vector3d& u, const LmgParams& p) {
    return Vector3d(-p.Omega, 0.0, -p.chi * u.z() - p.omega);
}

Vector3d bloch_rhs(const Vector3d& u, const LmgParams& p) {
    return field_at(u, p).cross(u);
}

} // namespace

Trajectory bloch_evolve(double theta, double phi, const LmgParams& p, double T,
                        double dt) {
    const double fastest = std::max({p.Omega, p.chi, std::abs(p.omega)});
    if (fastest > 0.0 && dt > 0.01 / fastest + 1e-15)
        throw InvalidParams("dt too coarse for the fastest precession scale");
    if (!(dt > 0.0) || !(T >= 0.0)) throw InvalidParams("need dt > 0 and T >= 0");

    Trajectory traj;
    traj.params = p;
    traj.dt = dt;

    Vector3d u(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
               std::cos(theta));
    const double e0 = initial_energy_per_spin(theta, phi, p);
    traj.energy = p.N * e0;
    const double e_scale =
        0.25 * p.chi + 0.5 * p.Omega + 0.5 * std::abs(p.omega);
    const double e_tol = 1e-6 * std::max(std::abs(e0), 0.1 * e_scale);

    const int steps = static_cast<int>(std::ceil(T / dt - 1e-12));
    traj.times.reserve(steps + 1);
    traj.samples.reserve(steps + 1);
    auto push = [&](double t, const Vector3d& v) {
        traj.times.push_back(t);
        traj.samples.push_back({v.x(), v.y(), v.z()});
    };
    push(0.0, u);

    for (int i = 0; i < steps; ++i) {
        const Vector3d k1 = bloch_rhs(u, p);
        const Vector3d k2 = bloch_rhs(u + 0.5 * dt * k1, p);
        const Vector3d k3 = bloch_rhs(u + 0.5 * dt * k2, p);
        const Vector3d k4 = bloch_rhs(u + dt * k3, p);
        u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        push((i + 1) * dt, u);
        if (std::abs(energy_per_spin(traj.samples.back(), p) - e0) > e_tol)
            throw EnergyDrift("conserved energy drifted beyond 1e-6");
    }
    return traj;
}

double time_averaged_sz(const Trajectory& traj, double T) {
    if (traj.samples.size() < 2 || T <= 0.0)
        throw InvalidParams("need a trajectory spanning positive time");
    double acc = 0.0, span = 0.0;
    for (size_t i = 0; i + 1 < traj.samples.size(); ++i) {
        if (traj.times[i + 1] > T + 1e-12) break;
        const double w = traj.times[i + 1] - traj.times[i];
        acc += 0.5 * w * (traj.samples[i].sz + traj.samples[i + 1].sz);
        span += w;
    }
    if (span <= 0.0) throw InvalidParams("averaging window shorter than one step");
    return 0.5 * traj.params.N * acc / span;
}

bool ordered_phase(double theta, double phi, const LmgParams& p, double T) {
    if (T <= 0.0) T = 1e3 / p.chi;
    const double fastest = std::max({p.Omega, p.chi, std::abs(p.omega), 1e-6});
    const Trajectory traj = bloch_evolve(theta, phi, p, T, 0.01 / fastest);
    return std::abs(time_averaged_sz(traj, T)) > 0.05 * 0.5 * p.N;
}

MeanfieldQfi meanfield_qfi_detail(double theta, double phi, const LmgParams& p,
                                  double t, PerturbationAxis axis) {
    if (!(t >= 0.0)) throw InvalidParams("need t >= 0");
    const int col = axis == PerturbationAxis::Transverse ? 0 : 2;

    Vector3d u(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
               std::cos(theta));
    const Vector3d n_psi = u;
    Matrix3d R = Matrix3d::Identity(); // columns carry the Heisenberg probes
    Vector3d I = Vector3d::Zero();

    const double fastest = std::max({p.Omega, p.chi, std::abs(p.omega), 1e-30});
    const double dt = t > 0.0 ? std::min(0.004 / fastest, t / 64.0) : 0.0;
    const int steps = t > 0.0 ? static_cast<int>(std::ceil(t / dt - 1e-12)) : 0;
    const double h = steps > 0 ? t / steps : 0.0;

    // columns rotate as m' = m x (R B); the probe integral rides along
    auto rhs = [&](const Vector3d& uu, const Matrix3d& RR, Vector3d& du,
                   Matrix3d& dR, Vector3d& dI) {
        const Vector3d B = field_at(uu, p);
        du = B.cross(uu);
        const Vector3d w = RR * B;
        for (int j = 0; j < 3; ++j) dR.col(j) = RR.col(j).cross(w);
        dI = RR.col(col);
    };

    const double e0 = initial_energy_per_spin(theta, phi, p);
    const double e_scale =
        0.25 * p.chi + 0.5 * p.Omega + 0.5 * std::abs(p.omega);
    MeanfieldQfi out;

    Vector3d du1, du2, du3, du4, dI1, dI2, dI3, dI4;
    Matrix3d dR1, dR2, dR3, dR4;
    for (int i = 0; i < steps; ++i) {
        rhs(u, R, du1, dR1, dI1);
        rhs(u + 0.5 * h * du1, R + 0.5 * h * dR1, du2, dR2, dI2);
        rhs(u + 0.5 * h * du2, R + 0.5 * h * dR2, du3, dR3, dI3);
        rhs(u + h * du3, R + h * dR3, du4, dR4, dI4);
        u += (h / 6.0) * (du1 + 2.0 * du2 + 2.0 * du3 + du4);
        R += (h / 6.0) * (dR1 + 2.0 * dR2 + 2.0 * dR3 + dR4);
        I += (h / 6.0) * (dI1 + 2.0 * dI2 + 2.0 * dI3 + dI4);
    }

    const BlochVector uf{u.x(), u.y(), u.z()};
    out.energy_drift = std::abs(energy_per_spin(uf, p) - e0) /
                       std::max(std::abs(e0), 0.1 * e_scale);
    if (out.energy_drift > 1e-6)
        throw EnergyDrift("conserved energy drifted beyond 1e-6");
    out.frame_error = (R.transpose() * R - Matrix3d::Identity()).cwiseAbs().maxCoeff();

    out.integral_sq = I.squaredNorm();
    if (out.integral_sq > 0.0) {
        out.n_alpha = I / std::sqrt(out.integral_sq);
        const double proj = out.n_alpha.dot(n_psi);
        out.value = out.integral_sq * p.N * (1.0 - proj * proj);
    }
    return out;
}

double meanfield_qfi(double theta, double phi, const LmgParams& p, double t,
                     PerturbationAxis axis) {
    return meanfield_qfi_detail(theta, phi, p, t, axis).value;
}

} // namespace lmg
