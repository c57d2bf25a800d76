#pragma once

#include <cstdint>
#include <string>

namespace nsprobe {

enum class Mode { paper, practical };

/// Base used wherever a formula says "log n". Natural log is the default;
/// base 2 is selectable for sensitivity experiments.
enum class LogBase { natural, base2 };

std::string to_string(Mode m);
std::string to_string(LogBase b);

/// Every constant the estimator family depends on, derived once from
/// (n, delta, epsilon, C, mode) and overridable field by field afterwards.
struct NsParams {
    int n = 0;
    double delta = 0.0;
    double epsilon = 0.0;
    double C = 2.0;  // lower-bound exponent: assumes NS >= n^-C
    Mode mode = Mode::practical;
    LogBase log_base = LogBase::natural;

    double eta1 = 0.0;  // default sqrt(C) + 4
    double eta2 = 0.0;  // default C + 2
    double t1 = 0.0;    // middle-band halfwidth, clamped to n/2
    int t2 = 0;         // level-range length for the length sampler, in [1, n]
    int w = 0;          // descending-walk length for the edge sampler

    long long kappa = 0;            // success target of the path loop
    double influence_accuracy = 0;  // relative accuracy requested of stage 1
    long long influence_kappa = 0;  // success target of stage 1

    long long influence_trial_cap = 10'000'000;
    long long edge_attempt_cap = 100'000'000;
    long long w_loop_cap = 1'000'000;
    long long iteration_cap = 100'000'000;

    bool trust_monotone = false;   // skip the small-n exhaustive check
    bool check_invariants = true;  // per-sample structural assertions

    double log_n() const;

    static NsParams make(int n, double delta, double epsilon, double C = 2.0,
                         Mode mode = Mode::practical, LogBase log_base = LogBase::natural);

    /// Throws std::invalid_argument when a field is out of its documented range.
    void validate() const;
};

}  // namespace nsprobe
