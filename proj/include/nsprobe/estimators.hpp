#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "nsprobe/nsparams.hpp"
#include "nsprobe/oracle.hpp"
#include "nsprobe/rng.hpp"

namespace nsprobe {

/// Output of a sampling estimator. `queries` matches the session counter
/// delta when workers == 1; with more workers it reports the sequential
/// semantics (trials past the stopping index are discarded).
struct EstimateReport {
    std::string method;
    double value = 0.0;
    std::uint64_t queries = 0;
    long long trials = 0;
    long long successes = 0;
    std::uint64_t seed = 0;
    bool sequential = true;  // false: fixed trial count
    bool capped = false;     // trial cap reached before the success target
    int workers = 1;

    std::string to_json_string(int indent = -1) const;
};

struct SamplingOptions {
    std::uint64_t seed = 0;
    int workers = 1;
    long long kappa = -1;      // success target; -1 derives ceil(48/eps^2)
    long long trial_cap = -1;  // -1: estimator-specific default
    bool fixed_trials = false;
    long long fixed_n = 0;
    bool trust_monotone = false;
};

/// Standard sampling for noise sensitivity: per trial draw a correlated pair
/// and test disagreement (2 queries). Sequential until kappa disagreements.
EstimateReport std_ns_estimate(OracleSession& session, double delta, double epsilon,
                               const SamplingOptions& opts = {});

/// Standard sampling for the bias (1 query per trial).
EstimateReport std_bias_estimate(OracleSession& session, double epsilon,
                                 const SamplingOptions& opts = {});

/// Descending-walk influence estimator for monotone functions: per trial
/// walk w steps down from a uniform point and test for a value change.
/// Returns n * successes / (w * trials). Walk length and caps come from
/// `params`; the report is capped when I[f] looks smaller than n^-C.
EstimateReport influence_estimate(OracleSession& session, double epsilon, const NsParams& params,
                                  const SamplingOptions& opts = {});

namespace detail {

struct TrialOutcome {
    bool success = false;
    std::uint32_t queries = 0;
    std::uint64_t aux = 0;  // extra counter (edge-sampler attempts)
    int flag = 0;           // nonzero aborts the run with this code
};

struct RunTotals {
    long long trials = 0;
    long long successes = 0;
    std::uint64_t queries = 0;
    std::uint64_t aux = 0;
    bool reached_target = false;
    int stop_flag = 0;
};

/// Deterministic sequential/parallel trial runner. Trial `i` draws all its
/// randomness from Rng::derive(seed, i), so results are identical for any
/// worker count; workers only change how outcomes are produced, never the
/// index-ordered scan that consumes them.
RunTotals run_trials(std::uint64_t seed, long long kappa, long long trial_cap, bool fixed,
                     long long fixed_n, int workers, std::uint64_t aux_cap,
                     const std::function<TrialOutcome(long long, Rng&)>& trial);

}  // namespace detail

}  // namespace nsprobe
