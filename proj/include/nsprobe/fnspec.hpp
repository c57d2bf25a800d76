#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nsprobe/hypercube.hpp"
#include "nsprobe/rng.hpp"

namespace nsprobe {

/// Immutable description of a Boolean function on {0,1}^n. Leaves are the
/// builtins; internal nodes combine children. Specs are shareable and cheap
/// to copy by pointer.
struct FunctionSpec;
using SpecPtr = std::shared_ptr<const FunctionSpec>;

struct FunctionSpec {
    enum class Kind {
        Constant,    // value
        Dictator,    // index
        Parity,      // test-only, non-monotone
        Majority,    // 1 iff level(x) > n/2
        Threshold,   // 1 iff level(x) > threshold
        Dnf,         // OR of AND-clauses over positive literals
        TruthTable,  // explicit table, n <= 30
        Or,          // OR of children
        Truncate,    // force 1 when level(x) > threshold, else child
        Permute,     // child evaluated at the permuted input
    };

    Kind kind;
    int n = 0;
    bool value = false;                     // Constant
    int index = 0;                          // Dictator
    int threshold = 0;                      // Threshold / Truncate
    std::vector<std::vector<int>> clauses;  // Dnf; distinct coords per clause
    std::vector<std::uint64_t> table;       // TruthTable, packed 2^n bits
    std::vector<int> perm;                  // Permute: sigma, a permutation of [n]
    std::vector<SpecPtr> children;          // Or / Truncate / Permute

    bool table_get(std::uint32_t idx) const { return (table[idx >> 6] >> (idx & 63)) & 1ull; }
};

// Builders validate their arguments and throw std::invalid_argument.
namespace fn {
SpecPtr constant(int n, bool value);
SpecPtr dictator(int n, int index);
SpecPtr parity(int n);
SpecPtr majority(int n);
SpecPtr threshold(int n, int t);
SpecPtr dnf(int n, std::vector<std::vector<int>> clauses);
SpecPtr truth_table_fn(int n, const std::vector<std::uint64_t>& packed_bits);
SpecPtr or_of(std::vector<SpecPtr> children);
SpecPtr truncate(SpecPtr child, int t);
SpecPtr permute(SpecPtr child, std::vector<int> sigma);
}  // namespace fn

/// Evaluate without any session bookkeeping.
bool eval_spec(const FunctionSpec& spec, const Point& x);

/// Smallest threshold T > n/2 whose strict upper tail Pr[L(x) > T] is at
/// most n^-C1. Throws if no T in (n/2, n] qualifies.
int f0_threshold(int n, double C1);

/// The truncated-threshold hard instance: 1 iff level(x) > f0_threshold(n, C1).
SpecPtr make_f0(int n, double C1);

/// OR of num_clauses AND-clauses, each a uniformly random clause_width-subset
/// of [n] (coordinates distinct within a clause, clauses independent).
SpecPtr make_random_dnf(int n, int num_clauses, int clause_width, Rng& rng);

struct DnfShape {
    int num_clauses;
    int clause_width;
};

/// ceil(2^sqrt(n) / n^C2) clauses of width ceil(sqrt(n)); feasible for n <= 36.
DnfShape paper_shape(int n, double C2);

/// Exhaustive edge scan; requires n <= 20.
bool monotonicity_check(const FunctionSpec& spec);

/// Canonical single-line text form (JSON tree). Round-trips bit-exactly.
std::string serialize(const FunctionSpec& spec);
SpecPtr deserialize(const std::string& text);  // throws ParseError

SpecPtr load_spec_file(const std::string& path);

}  // namespace nsprobe
