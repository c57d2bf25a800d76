#include "nsprobe/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nsprobe/hypercube.hpp"

namespace nsprobe {

namespace detail {

RunTotals run_trials(std::uint64_t seed, long long kappa, long long trial_cap, bool fixed,
                     long long fixed_n, int workers, std::uint64_t aux_cap,
                     const std::function<TrialOutcome(long long, Rng&)>& trial) {
    RunTotals t;
    auto consume = [&](const TrialOutcome& out) -> bool {
        // Returns true when the scan should stop.
        ++t.trials;
        t.queries += out.queries;
        t.aux += out.aux;
        if (out.success)
            ++t.successes;
        if (out.flag != 0) {
            t.stop_flag = out.flag;
            return true;
        }
        if (!fixed && t.successes >= kappa) {
            t.reached_target = true;
            return true;
        }
        if (fixed && t.trials >= fixed_n) {
            t.reached_target = true;
            return true;
        }
        if (!fixed && trial_cap > 0 && t.trials >= trial_cap)
            return true;
        if (aux_cap > 0 && t.aux >= aux_cap)
            return true;
        return false;
    };

    if (workers <= 1) {
        for (long long idx = 0;; ++idx) {
            Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(idx));
            if (consume(trial(idx, rng)))
                return t;
        }
    }

    // Batched parallel execution; the scan below preserves index order, so
    // the result is identical to the sequential path.
    const long long batch = static_cast<long long>(workers) * 512;
    long long base = 0;
    std::vector<TrialOutcome> results(static_cast<std::size_t>(batch));
    while (true) {
        long long count = batch;
        if (fixed)
            count = std::min(count, fixed_n - base);
        if (!fixed && trial_cap > 0)
            count = std::min(count, trial_cap - base);
        if (count <= 0)
            count = 1;
        std::vector<std::thread> pool;
        long long per = (count + workers - 1) / workers;
        for (int wk = 0; wk < workers; ++wk) {
            long long lo = base + wk * per;
            long long hi = std::min(base + count, lo + per);
            if (lo >= hi)
                break;
            pool.emplace_back([&, lo, hi]() {
                for (long long idx = lo; idx < hi; ++idx) {
                    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(idx));
                    results[static_cast<std::size_t>(idx - base)] = trial(idx, rng);
                }
            });
        }
        for (auto& th : pool)
            th.join();
        for (long long idx = base; idx < base + count; ++idx)
            if (consume(results[static_cast<std::size_t>(idx - base)]))
                return t;
        base += count;
    }
}

}  // namespace detail

namespace {

long long default_kappa(double epsilon) {
    return static_cast<long long>(std::ceil(48.0 / (epsilon * epsilon)));
}

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || epsilon >= 1.0)
        throw std::invalid_argument("estimator: epsilon must be in (0, 1)");
}

void check_parallel_session(const OracleSession& session, int workers) {
    if (workers > 1 && session.memoized())
        throw std::invalid_argument("estimator: memoized sessions are single-threaded");
}

// Estimator entry points serve the monotone-function algorithms; parity and
// friends are admitted only with the force flag (exact oracles still take
// them unconditionally).
void check_monotone(const OracleSession& session, bool trusted) {
    if (!trusted && session.n() <= 12 && !monotonicity_check(session.spec()))
        throw std::invalid_argument(
            "estimator: function is not monotone (set trust_monotone to force)");
}

}  // namespace

std::string EstimateReport::to_json_string(int indent) const {
    nlohmann::json j;
    j["method"] = method;
    j["value"] = value;
    j["queries"] = queries;
    j["trials"] = trials;
    j["successes"] = successes;
    j["seed"] = seed;
    j["sequential"] = sequential;
    j["capped"] = capped;
    j["workers"] = workers;
    return j.dump(indent);
}

EstimateReport std_ns_estimate(OracleSession& session, double delta, double epsilon,
                               const SamplingOptions& opts) {
    if (!(delta > 0.0) || delta > 0.5)
        throw std::invalid_argument("std_ns_estimate: delta must be in (0, 1/2]");
    check_epsilon(epsilon);
    check_parallel_session(session, opts.workers);
    check_monotone(session, opts.trust_monotone);
    int n = session.n();
    long long kappa = opts.kappa > 0 ? opts.kappa : default_kappa(epsilon);

    auto trial = [&session, n, delta](long long, Rng& rng) {
        Point x = random_point(n, rng);
        Point z = x;
        for (int i = 0; i < n; ++i)
            if (rng.bernoulli(delta))
                z.flip(i);
        bool fx = session.evaluate(x);
        bool fz = session.evaluate(z);
        return detail::TrialOutcome{fx != fz, 2, 0, 0};
    };
    auto totals = detail::run_trials(opts.seed, kappa, opts.trial_cap, opts.fixed_trials,
                                     opts.fixed_n, opts.workers, 0, trial);

    EstimateReport r;
    r.method = "ns_std";
    r.value = totals.trials > 0 ? static_cast<double>(totals.successes) / totals.trials : 0.0;
    r.queries = totals.queries;
    r.trials = totals.trials;
    r.successes = totals.successes;
    r.seed = opts.seed;
    r.sequential = !opts.fixed_trials;
    r.capped = !opts.fixed_trials && !totals.reached_target;
    r.workers = opts.workers;
    return r;
}

EstimateReport std_bias_estimate(OracleSession& session, double epsilon,
                                 const SamplingOptions& opts) {
    check_epsilon(epsilon);
    check_parallel_session(session, opts.workers);
    check_monotone(session, opts.trust_monotone);
    int n = session.n();
    long long kappa = opts.kappa > 0 ? opts.kappa : default_kappa(epsilon);

    auto trial = [&session, n](long long, Rng& rng) {
        Point x = random_point(n, rng);
        return detail::TrialOutcome{session.evaluate(x), 1, 0, 0};
    };
    auto totals = detail::run_trials(opts.seed, kappa, opts.trial_cap, opts.fixed_trials,
                                     opts.fixed_n, opts.workers, 0, trial);

    EstimateReport r;
    r.method = "bias_std";
    r.value = totals.trials > 0 ? static_cast<double>(totals.successes) / totals.trials : 0.0;
    r.queries = totals.queries;
    r.trials = totals.trials;
    r.successes = totals.successes;
    r.seed = opts.seed;
    r.sequential = !opts.fixed_trials;
    r.capped = !opts.fixed_trials && !totals.reached_target;
    r.workers = opts.workers;
    return r;
}

EstimateReport influence_estimate(OracleSession& session, double epsilon, const NsParams& params,
                                  const SamplingOptions& opts) {
    check_epsilon(epsilon);
    check_parallel_session(session, opts.workers);
    int n = session.n();
    if (n != params.n)
        throw std::invalid_argument("influence_estimate: params dimension mismatch");
    check_monotone(session, opts.trust_monotone || params.trust_monotone);

    int w = params.w;
    long long kappa = opts.kappa > 0 ? opts.kappa : default_kappa(epsilon);
    long long cap = opts.trial_cap > 0 ? opts.trial_cap : params.influence_trial_cap;

    auto trial = [&session, n, w](long long, Rng& rng) {
        Point x = random_point(n, rng);
        Path walk = descending_walk(x, w, rng);
        Point y = walk.endpoint();
        bool fx = session.evaluate(x);
        bool fy = session.evaluate(y);
        return detail::TrialOutcome{fx != fy, 2, 0, 0};
    };
    auto totals = detail::run_trials(opts.seed, kappa, cap, opts.fixed_trials, opts.fixed_n,
                                     opts.workers, 0, trial);

    EstimateReport r;
    r.method = "influence_walk";
    r.value = totals.trials > 0
                  ? static_cast<double>(n) * totals.successes / (static_cast<double>(w) * totals.trials)
                  : 0.0;
    r.queries = totals.queries;
    r.trials = totals.trials;
    r.successes = totals.successes;
    r.seed = opts.seed;
    r.sequential = !opts.fixed_trials;
    r.capped = !opts.fixed_trials && !totals.reached_target;
    r.workers = opts.workers;
    return r;
}

}  // namespace nsprobe
