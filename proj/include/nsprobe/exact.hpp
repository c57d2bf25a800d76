#pragma once

#include <map>
#include <string>
#include <vector>

#include "nsprobe/fnspec.hpp"
#include "nsprobe/hypercube.hpp"

namespace nsprobe::exact {

/// Full evaluation of a spec, one bit per point, indexed by Point::index()
/// (coordinate 0 = least significant index bit). n <= 30.
struct TruthTable {
    int n = 0;
    std::vector<std::uint64_t> words;

    bool get(std::uint32_t idx) const { return (words[idx >> 6] >> (idx & 63)) & 1ull; }
    void set(std::uint32_t idx, bool v) {
        std::uint64_t bit = 1ull << (idx & 63);
        if (v)
            words[idx >> 6] |= bit;
        else
            words[idx >> 6] &= ~bit;
    }
    std::uint64_t size() const { return 1ull << n; }
    std::uint64_t count_ones() const;
};

TruthTable truth_table(const FunctionSpec& spec);

/// Pr[f(x) = 1] for uniform x.
double exact_bias(const TruthTable& t);

/// |E_I| / 2^(n-1) from a scan of all n * 2^(n-1) edges.
double influence_edge_scan(const TruthTable& t);

std::uint64_t count_influential_edges(const TruthTable& t);

/// Walsh-Hadamard spectrum of g = 1 - 2f (the +/-1 convention, under which
/// Parseval gives sum of squares = 1). Memory is the binding constraint:
/// n <= 26.
struct FourierSpectrum {
    int n = 0;
    std::vector<double> ghat;          // indexed by subset mask S
    std::vector<double> level_weight;  // W_k = sum over |S| = k of ghat(S)^2

    double parseval() const;
    double influence() const;              // sum |S| ghat^2
    double ns(double delta) const;         // 1/2 sum (1 - (1-2d)^|S|) ghat^2
    double stability(double rho) const;    // sum rho^|S| ghat^2
};

FourierSpectrum fourier_spectrum(const TruthTable& t);

struct InfluencePair {
    double edge_scan;
    double fourier;
};

/// Influence computed both ways; the two must agree to ~1e-9.
InfluencePair exact_influence(const TruthTable& t);

double exact_ns(const TruthTable& t, double delta);

/// O(4^n) pairwise definition of noise sensitivity; n <= 12.
double exact_ns_direct(const TruthTable& t, double delta);

double exact_stability(const TruthTable& t, double rho);

/// Exact enumeration of the two-phase noise process for tiny n: per-edge hit
/// probabilities p_e and conditional flip-survival q_e over middle
/// influential edges, the bad-event masses, and the process view of NS.
struct EdgeStats {
    Edge edge;
    double p_e = 0.0;
    double q_e = 0.0;
};

struct ProcessDExact {
    int n = 0;
    double delta = 0.0;
    double t1 = 0.0;
    int t2 = 0;
    double p_A = 0.0;   // Pr[f(x)=1, f(y)=0, no bad events]
    double p_B = 0.0;   // Pr[f(z)=0 | f(x)=1, f(y)=0, no bad events]
    double pr_E1 = 0.0; // deep hit: influential edge crossed at depth >= t2
    double pr_E2 = 0.0; // non-middle hit
    double ns = 0.0;    // 2 Pr[f(x)=1, f(z)=0]
    double sum_pe = 0.0;
    double sum_pe_qe = 0.0;
    std::vector<EdgeStats> middle_edges;  // all of E_I inside the middle band
};

/// n <= 6. `t1` defines the middle band [n/2 - t1, n/2 + t1]; `t2` the
/// depth cutoff of the first bad event.
ProcessDExact process_d_exact(const FunctionSpec& spec, double delta, double t1, int t2);

/// Key for a sampled (P1, P2) pair: the start point plus both ordered flip
/// lists. Shared by the exact conditional law and by distribution tests.
std::string path_pair_key(const Point& x, const std::vector<int>& p1_flips,
                          const std::vector<int>& p2_flips);

/// Exact law of (P1, P2) under the noise process conditioned on P1 crossing
/// `e` with no bad events. n <= 6; e must lie in the middle band.
std::map<std::string, double> conditional_path_law(const FunctionSpec& spec, double delta,
                                                   double t1, int t2, const Edge& e);

}  // namespace nsprobe::exact
