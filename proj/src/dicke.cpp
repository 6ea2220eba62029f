#include "lmg/dicke.hpp"

#include <cmath>
#include <limits>

namespace lmg {

namespace {
double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}
} // namespace

DickeState coherent_state(int N, double theta, double phi) {
    if (N < 1) throw InvalidParams("coherent_state: N must be >= 1");
    DickeState st;
    st.N = N;
    st.amp.resize(N + 1);

    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const double lc = std::log(std::abs(c));
    const double ls = std::log(std::abs(s));
    const double inf = std::numeric_limits<double>::infinity();

    for (int k = 0; k <= N; ++k) {
        // radial part in log space; exact zeros at the poles
        double lr;
        if (c == 0.0 && k > 0) lr = -inf;
        else if (s == 0.0 && k < N) lr = -inf;
        else lr = 0.5 * log_binomial(N, k) + k * (c == 0.0 ? 0.0 : lc)
                  + (N - k) * (s == 0.0 ? 0.0 : ls);
        double r = std::exp(lr);
        if (c < 0.0 && (k % 2)) r = -r;
        if (s < 0.0 && ((N - k) % 2)) r = -r;
        st.amp[k] = r * std::exp(std::complex<double>(0.0, -k * phi));
    }
    st.amp /= st.amp.norm();
    return st;
}

DickeState basis_state(int N, int k) {
    if (N < 1 || k < 0 || k > N) throw InvalidParams("basis_state: bad index");
    DickeState st;
    st.N = N;
    st.amp = Eigen::VectorXcd::Zero(N + 1);
    st.amp[k] = 1.0;
    return st;
}

} // namespace lmg
