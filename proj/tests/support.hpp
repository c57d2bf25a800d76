#pragma once

// Shared statistics helpers for the test suites: chi-square goodness of fit
// (via the regularized incomplete gamma function) and total variation
// distance between sampled and exact discrete laws.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsupport {

// Regularized upper incomplete gamma Q(a, x), series/continued-fraction form.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0)
        throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0)
        return 1.0;
    auto gser = [&](double& gamser) {
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-14)
                break;
        }
        gamser = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    };
    auto gcf = [&](double& gammcf) {
        const double fpmin = 1e-300;
        double b = x + 1.0 - a;
        double c = 1.0 / fpmin;
        double d = 1.0 / b;
        double h = d;
        for (int i = 1; i <= 500; ++i) {
            double an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if (std::fabs(d) < fpmin)
                d = fpmin;
            c = b + an / c;
            if (std::fabs(c) < fpmin)
                c = fpmin;
            d = 1.0 / d;
            double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < 1e-14)
                break;
        }
        gammcf = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    };
    if (x < a + 1.0) {
        double gamser;
        gser(gamser);
        return 1.0 - gamser;
    }
    double gammcf;
    gcf(gammcf);
    return gammcf;
}

struct Chi2Result {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Goodness of fit of observed counts against expected probabilities. Bins
// whose expected count falls below `min_expected` are pooled into the last
// kept bin, the usual remedy for sparse tails.
inline Chi2Result chi2_gof(const std::vector<long long>& observed,
                           const std::vector<double>& expected_prob, double min_expected = 10.0) {
    if (observed.size() != expected_prob.size())
        throw std::invalid_argument("chi2_gof: size mismatch");
    long long total = 0;
    for (long long o : observed)
        total += o;
    std::vector<double> exp_counts;
    std::vector<double> obs_counts;
    double pool_exp = 0.0, pool_obs = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double e = expected_prob[i] * static_cast<double>(total);
        if (e < min_expected) {
            pool_exp += e;
            pool_obs += static_cast<double>(observed[i]);
        } else {
            exp_counts.push_back(e);
            obs_counts.push_back(static_cast<double>(observed[i]));
        }
    }
    if (pool_exp > 0.0) {
        exp_counts.push_back(pool_exp);
        obs_counts.push_back(pool_obs);
    }
    Chi2Result r;
    r.dof = static_cast<int>(exp_counts.size()) - 1;
    for (std::size_t i = 0; i < exp_counts.size(); ++i) {
        double d = obs_counts[i] - exp_counts[i];
        r.statistic += d * d / exp_counts[i];
    }
    if (r.dof < 1) {
        r.p_value = 1.0;
        return r;
    }
    r.p_value = gamma_q(0.5 * r.dof, 0.5 * r.statistic);
    return r;
}

// Total variation distance between an empirical count map and an exact law.
// Mass the samples put on keys absent from the law counts fully.
template <typename Key>
double total_variation(const std::map<Key, long long>& counts, long long total,
                       const std::map<Key, double>& law) {
    double tv = 0.0;
    for (const auto& [key, prob] : law) {
        auto it = counts.find(key);
        double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
        tv += std::fabs(emp - prob);
    }
    for (const auto& [key, cnt] : counts)
        if (law.find(key) == law.end())
            tv += static_cast<double>(cnt) / total;
    return 0.5 * tv;
}

}  // namespace testsupport
