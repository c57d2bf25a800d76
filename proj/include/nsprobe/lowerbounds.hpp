#pragma once

#include <cstdint>
#include <string>

#include "nsprobe/fnspec.hpp"
#include "nsprobe/rng.hpp"

namespace nsprobe::lb {

/// Hard-instance families: D1 is the truncated threshold function alone;
/// D2 members OR it with a freshly permuted random DNF. The kind records
/// which property the instance is built to exhibit and fixes reporting
/// defaults; the construction is shared.
enum class FamilyKind { D1, D2_bias, D2_influence, D2_ns };

std::string to_string(FamilyKind k);
FamilyKind family_kind_from_string(const std::string& s);

struct FamilySpec {
    FamilyKind kind = FamilyKind::D2_bias;
    int n = 16;
    double C1 = 2.0;
    double C2 = 0.0;
    int num_clauses = 0;   // 0: paper_shape(n, C2)
    int clause_width = 0;  // 0: paper_shape(n, C2)
    double delta = 0.0;    // D2_ns; 0 defaults to 1/sqrt(n)

    FamilySpec resolved() const;
};

/// Level of the threshold function's last all-zeros layer; distinguisher
/// queries and thinness measurements live here.
int family_threshold(const FamilySpec& spec);

/// D1 -> f0; D2 -> or(f0, permute(random dnf)) with fresh permutation and
/// clauses per draw.
SpecPtr draw_family(const FamilySpec& spec, Rng& rng);

struct ThinnessReport {
    int level = 0;
    double estimate = 0.0;
    long long samples = 0;
    double std_error = 0.0;
    bool exact = false;  // enumerated the whole level instead of sampling
};

/// Pr[f(x) = 1 | L(x) = level]; enumerated exactly when C(n, level) <= 1e6.
ThinnessReport measure_thinness(const FunctionSpec& spec, int level, long long samples, Rng& rng);

struct DistinguishPoint {
    long long q = 0;
    long long trials = 0;
    double success_rate = 0.0;
    double bound = 0.0;     // 1/2 + q * thinness
    double thinness = 0.0;  // family-average thinness estimate
    double std_error = 0.0;
    bool vacuous = false;  // bound >= 1
};

/// Simulates the optimal-form non-adaptive distinguisher (q uniform
/// threshold-level queries, answer D2 iff any returns 1) against a fair
/// hidden choice between D1 and the given D2 family.
DistinguishPoint distinguisher_experiment(const FamilySpec& d2, long long q, long long trials,
                                          Rng& rng);

/// Uniform over functions with exactly round(alpha * 2^n) ones. n <= 24.
SpecPtr draw_h_alpha(int n, double alpha, Rng& rng);

struct FamilyProperties {
    double bias = 0.0;
    double influence = 0.0;
    double ns = 0.0;
    double delta = 0.0;
    // Asymptotic reference shapes (unspecified constants), for context only.
    double target_bias = 0.0;
    double target_influence = 0.0;
    double target_ns = 0.0;
    bool exact = false;
};

/// Measures one draw of the family: exact (truth table + spectrum) when
/// n <= 20, sampled with `sample_budget` points otherwise.
FamilyProperties verify_family_properties(const FamilySpec& spec, long long sample_budget,
                                          Rng& rng);

/// Family specs round-trip through a JSON header alongside the function DSL.
std::string serialize_family(const FamilySpec& spec);
FamilySpec deserialize_family(const std::string& text);

}  // namespace nsprobe::lb
