#include "nsprobe/nscore.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "nsprobe/errors.hpp"

namespace nsprobe {

namespace {

// Stage tags keep the per-trial random streams of the two stages disjoint.
constexpr std::uint64_t kInfluenceStream = 0x1f1e6d5a9b3c0001ull;
constexpr std::uint64_t kLoopStream = 0x1f1e6d5a9b3c0002ull;

constexpr int kFlagEdgeCap = 1;
constexpr int kFlagWLoopCap = 2;

void invariant(bool ok, const char* msg) {
    if (!ok)
        throw std::logic_error(std::string("nscore invariant violated: ") + msg);
}

}  // namespace

bool in_middle(const Edge& e, const NsParams& params) {
    return in_middle_band(params.n, params.t1, e.lower_level(), e.upper_level());
}

EdgeSample sample_edge_A(OracleSession& session, const NsParams& params, Rng& rng) {
    int n = session.n();
    EdgeSample out;
    Point x = random_point(n, rng);
    Path walk = descending_walk(x, params.w, rng);
    Point y = walk.endpoint();
    bool fx = session.evaluate(x);
    bool fy = session.evaluate(y);
    out.queries = 2;
    if (fx == fy)
        return out;

    // f is monotone and changes along the walk, so its values down the path
    // form a 1...10...0 sequence; binary search isolates the boundary.
    std::vector<Point> verts = walk.vertices();
    int lo = 0;
    int hi = walk.length();
    bool f_lo = fx;
    bool f_hi = fy;
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        bool fm = session.evaluate(verts[static_cast<std::size_t>(mid)]);
        ++out.queries;
        if (fm)
            lo = mid;
        else
            hi = mid;
    }
    if (params.check_invariants) {
        invariant(f_lo && !f_hi, "edge sampler: endpoints not a 1->0 crossing");
        invariant(hi == lo + 1, "edge sampler: search did not isolate an edge");
    }
    Edge e{verts[static_cast<std::size_t>(hi)], walk.flips[static_cast<std::size_t>(lo)]};
    if (!in_middle(e, params))
        return out;  // influential but outside the band: a failed attempt
    out.edge = e;
    return out;
}

WSample sample_lengths_W(const Edge& e, const NsParams& params, Rng& rng) {
    int n = params.n;
    int upper = e.upper_level();
    int lo = upper;
    long long hi_raw = static_cast<long long>(upper) + params.t2 - 1;
    int hi = static_cast<int>(std::min<long long>(hi_raw, n));
    WSample out;
    out.range_clamped = hi_raw > n;
    while (true) {
        if (out.attempts >= params.w_loop_cap)
            throw CapExceededError("sample_lengths_W: rejection loop exceeded its cap");
        ++out.attempts;
        int l = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
        Point x = random_point_at_level(n, l, rng);
        Path p1 = phase1_walk(x, params.delta, rng);
        int end_level = l - p1.length();
        if (end_level > e.lower_level())
            continue;  // did not reach the edge's layer
        out.w1 = l - upper;
        out.w2 = e.lower_level() - end_level;
        if (params.check_invariants)
            invariant(out.w1 >= 0 && out.w1 <= params.t2 - 1, "length sampler: w1 out of range");
        return out;
    }
}

PathPair sample_paths_B(const Edge& e, const NsParams& params, Rng& rng) {
    WSample ws = sample_lengths_W(e, params, rng);
    Point v1 = e.upper();
    Point v2 = e.lower;

    Path up = ascending_walk(v1, ws.w1, rng);
    Point x = up.endpoint();
    Path down = descending_walk(v2, ws.w2, rng);
    Point y = down.endpoint();

    PathPair out;
    out.w1 = ws.w1;
    out.w2 = ws.w2;
    out.range_clamped = ws.range_clamped;
    out.x = x;
    out.y = y;

    // P1 runs x -> v1 -> v2 -> y; the ascending flips replay in reverse.
    out.p1.start = x;
    out.p1.direction = Direction::descending;
    out.p1.flips.reserve(up.flips.size() + 1 + down.flips.size());
    for (auto it = up.flips.rbegin(); it != up.flips.rend(); ++it)
        out.p1.flips.push_back(*it);
    out.p1.flips.push_back(e.coord);
    for (int f : down.flips)
        out.p1.flips.push_back(f);

    out.p2 = phase2_walk(y, x.clear_coords(), params.delta, rng);
    out.z = out.p2.endpoint();

    if (params.check_invariants) {
        invariant(out.p1.endpoint() == y, "path sampler: P1 endpoint mismatch");
        invariant(v2.leq(x), "path sampler: x does not dominate the edge");
        for (int f : out.p2.flips)
            invariant(!x.get(f), "path sampler: P2 flipped a coordinate set in x");
    }
    return out;
}

std::string to_string(NsStatus s) {
    switch (s) {
        case NsStatus::ok:
            return "ok";
        case NsStatus::influence_cap_exceeded:
            return "influence_cap_exceeded";
        case NsStatus::edge_attempt_cap_exceeded:
            return "edge_attempt_cap_exceeded";
        case NsStatus::w_loop_cap_exceeded:
            return "w_loop_cap_exceeded";
        case NsStatus::iteration_cap_exceeded:
            return "iteration_cap_exceeded";
    }
    return "unknown";
}

std::string NsReport::to_json_string(int indent) const {
    nlohmann::json j;
    j["method"] = "ns_main";
    j["status"] = to_string(status);
    if (status == NsStatus::ok)
        j["estimate"] = estimate;
    else
        j["estimate"] = nullptr;
    j["influence_estimate"] = influence_estimate;
    j["p_tilde_A"] = p_tilde_A;
    j["p_tilde_B"] = p_tilde_B;
    j["queries"] = queries;
    j["influence_queries"] = influence_queries;
    j["influence_trials"] = influence_trials;
    j["edge_sampler_attempts"] = edge_sampler_attempts;
    j["loop_iterations"] = loop_iterations;
    j["successes"] = successes;
    j["seed"] = seed;
    j["workers"] = workers;
    j["w_range_clamped"] = w_range_clamped;
    j["warnings"] = warnings;
    return j.dump(indent);
}

NsReport estimate_ns(OracleSession& session, const NsParams& params, std::uint64_t seed,
                     int workers) {
    params.validate();
    int n = session.n();
    if (n != params.n)
        throw std::invalid_argument("estimate_ns: params dimension mismatch");
    if (workers > 1 && session.memoized())
        throw std::invalid_argument("estimate_ns: memoized sessions are single-threaded");
    if (!params.trust_monotone && n <= 12 && !monotonicity_check(session.spec()))
        throw std::invalid_argument(
            "estimate_ns: function is not monotone (set trust_monotone to force)");

    NsReport report;
    report.seed = seed;
    report.workers = workers;
    report.estimate = std::numeric_limits<double>::quiet_NaN();

    double lo = 1.0 / n;
    double hi = 1.0 / (std::sqrt(static_cast<double>(n)) * params.log_n());
    if (params.delta < lo - 1e-12 || params.delta > hi + 1e-12)
        report.warnings.push_back("delta outside the advised range [1/n, 1/(sqrt(n) log n)]; "
                                  "standard sampling may be preferable");

    // Stage 1: influence.
    SamplingOptions iopts;
    iopts.seed = Rng::derive(seed, kInfluenceStream).u64();
    iopts.workers = workers;
    iopts.kappa = params.influence_kappa;
    iopts.trial_cap = params.influence_trial_cap;
    iopts.trust_monotone = true;  // checked above once
    EstimateReport inf = influence_estimate(session, params.influence_accuracy, params, iopts);
    report.influence_estimate = inf.value;
    report.influence_queries = inf.queries;
    report.influence_trials = inf.trials;
    report.queries = inf.queries;
    if (inf.capped) {
        report.status = NsStatus::influence_cap_exceeded;
        return report;
    }

    // Stage 2.
    report.p_tilde_A = 0.5 * params.delta * inf.value;

    // Stage 3: sample edges and path pairs until kappa pairs flip the value.
    auto iteration = [&session, &params](long long, Rng& rng) {
        detail::TrialOutcome out;
        std::optional<Edge> edge;
        while (!edge) {
            if (out.aux >= static_cast<std::uint64_t>(params.edge_attempt_cap)) {
                out.flag = kFlagEdgeCap;
                return out;
            }
            EdgeSample es = sample_edge_A(session, params, rng);
            out.queries += static_cast<std::uint32_t>(es.queries);
            ++out.aux;
            edge = es.edge;
        }
        PathPair pair;
        try {
            pair = sample_paths_B(*edge, params, rng);
        } catch (const CapExceededError&) {
            out.flag = kFlagWLoopCap;
            return out;
        }
        bool fx = session.evaluate(pair.x);
        bool fz = session.evaluate(pair.z);
        out.queries += 2;
        if (params.check_invariants)
            invariant(fx, "estimate_ns: f(x) must be 1 above an influential edge");
        out.success = fx && !fz;
        return out;
    };

    auto totals = detail::run_trials(Rng::derive(seed, kLoopStream).u64(), params.kappa,
                                     params.iteration_cap, false, 0, workers,
                                     static_cast<std::uint64_t>(params.edge_attempt_cap), iteration);
    report.queries += totals.queries;
    report.edge_sampler_attempts = static_cast<long long>(totals.aux);
    report.loop_iterations = totals.trials;
    report.successes = totals.successes;
    if (totals.stop_flag == kFlagEdgeCap ||
        (!totals.reached_target && totals.aux >= static_cast<std::uint64_t>(params.edge_attempt_cap))) {
        report.status = NsStatus::edge_attempt_cap_exceeded;
        return report;
    }
    if (totals.stop_flag == kFlagWLoopCap) {
        report.status = NsStatus::w_loop_cap_exceeded;
        return report;
    }
    if (!totals.reached_target) {
        report.status = NsStatus::iteration_cap_exceeded;
        return report;
    }
    report.p_tilde_B = static_cast<double>(totals.successes) / totals.trials;
    report.estimate = 2.0 * report.p_tilde_A * report.p_tilde_B;
    return report;
}

}  // namespace nsprobe
