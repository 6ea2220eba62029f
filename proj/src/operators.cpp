#include "lmg/operators.hpp"
#include "lmg/errors.hpp"

#include <cmath>
#include <complex>

namespace lmg {

using std::complex;

namespace {

template <bool Anti>
inline complex<double> row_product(const CollectiveOperator& op,
                                   const Eigen::VectorXcd& x, int k, int D) {
    complex<double> v = op.diag[k] * x[k];
    if constexpr (!Anti) {
        if (k + 1 < D) v += op.off[k] * x[k + 1];
        if (k > 0) v += op.off[k - 1] * x[k - 1];
    } else {
        const complex<double> iu(0.0, 1.0);
        if (k + 1 < D) v += iu * op.off[k] * x[k + 1];
        if (k > 0) v -= iu * op.off[k - 1] * x[k - 1];
    }
    return v;
}

} // namespace

void apply_serial(const CollectiveOperator& op, const Eigen::VectorXcd& x,
                  Eigen::VectorXcd& y) {
    const int D = op.dim();
    if (x.size() != D)
        throw DimensionMismatch("operator dim " + std::to_string(D) +
                                " vs state dim " + std::to_string(x.size()));
    y.resize(D);
    if (!op.anti)
        for (int k = 0; k < D; ++k) y[k] = row_product<false>(op, x, k, D);
    else
        for (int k = 0; k < D; ++k) y[k] = row_product<true>(op, x, k, D);
}

void apply_omp(const CollectiveOperator& op, const Eigen::VectorXcd& x,
               Eigen::VectorXcd& y) {
    const int D = op.dim();
    if (x.size() != D)
        throw DimensionMismatch("operator dim " + std::to_string(D) +
                                " vs state dim " + std::to_string(x.size()));
    y.resize(D);
    if (!op.anti) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < D; ++k) y[k] = row_product<false>(op, x, k, D);
    } else {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < D; ++k) y[k] = row_product<true>(op, x, k, D);
    }
}

Eigen::VectorXcd CollectiveOperator::apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y;
    apply_omp(*this, x, y);
    return y;
}

DickeState CollectiveOperator::apply(const DickeState& st) const {
    if (st.N != N) throw DimensionMismatch("operator N vs state N");
    return DickeState{N, apply(st.amp)};
}

double CollectiveOperator::gershgorin_radius() const {
    double r = 0.0;
    const int D = dim();
    for (int k = 0; k < D; ++k) {
        double row = std::abs(diag[k]);
        if (k > 0) row += std::abs(off[k - 1]);
        if (k + 1 < D) row += std::abs(off[k]);
        r = std::max(r, row);
    }
    return r;
}

namespace {

// Ladder matrix element between |m_k> and |m_{k+1}>, m_k = k - N/2:
// b_k = (1/2) sqrt(S(S+1) - m_k m_{k+1}), S = N/2.
Eigen::VectorXd ladder_elements(int N) {
    const double S = 0.5 * N;
    Eigen::VectorXd b(N);
    for (int k = 0; k < N; ++k) {
        const double m = k - S;
        b[k] = 0.5 * std::sqrt(S * (S + 1.0) - m * (m + 1.0));
    }
    return b;
}

} // namespace

CollectiveOperator spin_x(int N) {
    CollectiveOperator op;
    op.N = N;
    op.diag = Eigen::VectorXd::Zero(N + 1);
    op.off = ladder_elements(N);
    op.anti = false;
    return op;
}

CollectiveOperator spin_y(int N) {
    CollectiveOperator op;
    op.N = N;
    op.diag = Eigen::VectorXd::Zero(N + 1);
    op.off = ladder_elements(N);
    op.anti = true;
    return op;
}

CollectiveOperator spin_z(int N) {
    CollectiveOperator op;
    op.N = N;
    op.diag.resize(N + 1);
    const double S = 0.5 * N;
    for (int k = 0; k <= N; ++k) op.diag[k] = k - S;
    op.off = Eigen::VectorXd::Zero(N);
    op.anti = false;
    return op;
}

CollectiveOperator build_hamiltonian(const LmgParams& p) {
    p.validate();
    CollectiveOperator op;
    op.N = p.N;
    op.diag.resize(p.N + 1);
    const double S = 0.5 * p.N;
    for (int k = 0; k <= p.N; ++k) {
        const double m = k - S;
        op.diag[k] = -(p.chi / p.N) * m * m - p.omega * m;
    }
    op.off = ladder_elements(p.N);
    op.off *= -p.Omega;
    op.anti = false;
    return op;
}

CollectiveOperator perturbation_operator(int N, PerturbationAxis axis) {
    return axis == PerturbationAxis::Transverse ? spin_x(N) : spin_z(N);
}

double expectation(const CollectiveOperator& op, const DickeState& st) {
    const Eigen::VectorXcd y = op.apply(st.amp);
    return st.amp.dot(y).real();
}

double variance(const CollectiveOperator& op, const DickeState& st) {
    const Eigen::VectorXcd y = op.apply(st.amp);
    const double mean = st.amp.dot(y).real();
    // var = ||O psi - <O> psi||^2 for normalized psi; avoids <O^2> - <O>^2 cancellation
    return (y - mean * st.amp).squaredNorm();
}

} // namespace lmg
