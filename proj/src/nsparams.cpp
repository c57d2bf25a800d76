#include "nsprobe/nsparams.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsprobe {

std::string to_string(Mode m) { return m == Mode::paper ? "paper" : "practical"; }

std::string to_string(LogBase b) { return b == LogBase::natural ? "natural" : "base2"; }

double NsParams::log_n() const {
    double ln = std::log(static_cast<double>(n));
    return log_base == LogBase::natural ? ln : ln / std::log(2.0);
}

NsParams NsParams::make(int n, double delta, double epsilon, double C, Mode mode, LogBase log_base) {
    if (n < 2)
        throw std::invalid_argument("NsParams: n must be >= 2");
    NsParams p;
    p.n = n;
    p.delta = delta;
    p.epsilon = epsilon;
    p.C = C;
    p.mode = mode;
    p.log_base = log_base;
    p.eta1 = std::sqrt(C) + 4.0;
    p.eta2 = C + 2.0;

    double logn = p.log_n();
    p.t1 = std::min(p.eta1 * std::sqrt(n * logn), 0.5 * n);
    double t2_raw = n * delta * (1.0 + 3.0 * p.eta2 * logn);
    p.t2 = static_cast<int>(std::clamp(std::ceil(t2_raw), 1.0, static_cast<double>(n)));

    if (mode == Mode::paper) {
        double w_raw = epsilon / (3100.0 * p.eta1) * std::sqrt(n / logn);
        p.w = std::max(1, static_cast<int>(std::llround(w_raw)));
        p.kappa = static_cast<long long>(std::ceil(768.0 * std::log(200.0) / (epsilon * epsilon)));
        p.influence_accuracy = epsilon / 33.0;
    } else {
        p.w = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)) / logn)));
        p.kappa = static_cast<long long>(std::ceil(48.0 / (epsilon * epsilon)));
        p.influence_accuracy = epsilon / 4.0;
    }
    p.w = std::min(p.w, n);
    p.influence_kappa =
        static_cast<long long>(std::ceil(48.0 / (p.influence_accuracy * p.influence_accuracy)));
    p.validate();
    return p;
}

void NsParams::validate() const {
    if (n < 2)
        throw std::invalid_argument("NsParams: n must be >= 2");
    if (!(delta > 0.0) || delta > 0.5)
        throw std::invalid_argument("NsParams: delta must be in (0, 1/2]");
    if (!(epsilon > 0.0) || epsilon >= 1.0)
        throw std::invalid_argument("NsParams: epsilon must be in (0, 1)");
    if (C <= 0.0)
        throw std::invalid_argument("NsParams: C must be > 0");
    if (w < 1 || w > n)
        throw std::invalid_argument("NsParams: w must be in [1, n]");
    if (t2 < 1 || t2 > n)
        throw std::invalid_argument("NsParams: t2 must be in [1, n]");
    if (t1 < 0.0)
        throw std::invalid_argument("NsParams: t1 must be >= 0");
    // The middle band must contain at least one whole edge layer.
    if (std::ceil(0.5 * n - t1) > std::floor(0.5 * n + t1))
        throw std::invalid_argument("NsParams: middle band is empty");
    if (kappa < 1 || influence_kappa < 1)
        throw std::invalid_argument("NsParams: success targets must be >= 1");
    if (!(influence_accuracy > 0.0) || influence_accuracy >= 1.0)
        throw std::invalid_argument("NsParams: influence accuracy must be in (0, 1)");
}

}  // namespace nsprobe
