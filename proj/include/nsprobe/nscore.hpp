#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsprobe/estimators.hpp"
#include "nsprobe/hypercube.hpp"
#include "nsprobe/nsparams.hpp"
#include "nsprobe/oracle.hpp"

namespace nsprobe {

/// True iff both endpoint levels of e lie in [n/2 - t1, n/2 + t1].
bool in_middle(const Edge& e, const NsParams& params);

struct EdgeSample {
    std::optional<Edge> edge;  // empty: the attempt failed (a normal outcome)
    int queries = 0;
};

/// One attempt of the edge sampler: walk w steps down from a uniform point;
/// if the value changed, binary-search the path for the influential edge and
/// return it when it lies in the middle band.
EdgeSample sample_edge_A(OracleSession& session, const NsParams& params, Rng& rng);

struct WSample {
    int w1 = 0;  // levels above the edge's upper endpoint, in [0, t2-1]
    int w2 = 0;  // levels below the edge's lower endpoint
    long long attempts = 0;
    bool range_clamped = false;  // level range hit the top of the cube
};

/// Rejection-samples the start/end levels of a descending path conditioned
/// on crossing the layer of `e`. Makes no oracle queries. Throws
/// CapExceededError after params.w_loop_cap rejected attempts.
WSample sample_lengths_W(const Edge& e, const NsParams& params, Rng& rng);

struct PathPair {
    Path p1;  // descending, x -> y, crossing e
    Path p2;  // ascending, y -> z, over the zero coordinates of x
    Point x, y, z;
    int w1 = 0, w2 = 0;
    bool range_clamped = false;
};

/// Builds a full descending/ascending path pair through `e` using the
/// lengths from the length sampler. Makes no oracle queries.
PathPair sample_paths_B(const Edge& e, const NsParams& params, Rng& rng);

enum class NsStatus {
    ok,
    influence_cap_exceeded,
    edge_attempt_cap_exceeded,
    w_loop_cap_exceeded,
    iteration_cap_exceeded,
};

std::string to_string(NsStatus s);

struct NsReport {
    double estimate = 0.0;  // 2 * p_tilde_A * p_tilde_B; NaN unless status == ok
    double influence_estimate = 0.0;
    double p_tilde_A = 0.0;
    double p_tilde_B = 0.0;
    std::uint64_t queries = 0;  // influence stage + edge sampling + loop checks
    std::uint64_t influence_queries = 0;
    long long influence_trials = 0;
    long long edge_sampler_attempts = 0;
    long long loop_iterations = 0;
    long long successes = 0;
    std::uint64_t seed = 0;
    int workers = 1;
    NsStatus status = NsStatus::ok;
    bool w_range_clamped = false;
    std::vector<std::string> warnings;

    std::string to_json_string(int indent = -1) const;
};

/// The composed estimator: stage 1 estimates the influence with a descending
/// walk; stage 2 turns it into p_tilde_A = delta * I / 2; stage 3 samples
/// influential edges and path pairs through them until `kappa` of the pairs
/// flip the function, giving p_tilde_B. Returns 2 * p_tilde_A * p_tilde_B.
NsReport estimate_ns(OracleSession& session, const NsParams& params, std::uint64_t seed,
                     int workers = 1);

}  // namespace nsprobe
