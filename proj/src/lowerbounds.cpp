#include "nsprobe/lowerbounds.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "nsprobe/errors.hpp"
#include "nsprobe/exact.hpp"

namespace nsprobe::lb {

using json = nlohmann::json;

std::string to_string(FamilyKind k) {
    switch (k) {
        case FamilyKind::D1:
            return "D1";
        case FamilyKind::D2_bias:
            return "D2_bias";
        case FamilyKind::D2_influence:
            return "D2_influence";
        case FamilyKind::D2_ns:
            return "D2_ns";
    }
    return "unknown";
}

FamilyKind family_kind_from_string(const std::string& s) {
    if (s == "D1")
        return FamilyKind::D1;
    if (s == "D2_bias")
        return FamilyKind::D2_bias;
    if (s == "D2_influence")
        return FamilyKind::D2_influence;
    if (s == "D2_ns")
        return FamilyKind::D2_ns;
    throw std::invalid_argument("unknown family kind: " + s);
}

FamilySpec FamilySpec::resolved() const {
    FamilySpec r = *this;
    if (r.num_clauses <= 0 || r.clause_width <= 0) {
        DnfShape shape = paper_shape(r.n, r.C2);
        if (r.num_clauses <= 0)
            r.num_clauses = shape.num_clauses;
        if (r.clause_width <= 0)
            r.clause_width = shape.clause_width;
    }
    if (r.delta <= 0.0)
        r.delta = 1.0 / std::sqrt(static_cast<double>(r.n));
    return r;
}

int family_threshold(const FamilySpec& spec) { return f0_threshold(spec.n, spec.C1); }

SpecPtr draw_family(const FamilySpec& spec, Rng& rng) {
    FamilySpec r = spec.resolved();
    SpecPtr f0 = make_f0(r.n, r.C1);
    if (r.kind == FamilyKind::D1)
        return f0;
    SpecPtr dnf = make_random_dnf(r.n, r.num_clauses, r.clause_width, rng);
    std::vector<int> sigma(static_cast<std::size_t>(r.n));
    for (int i = 0; i < r.n; ++i)
        sigma[static_cast<std::size_t>(i)] = i;
    rng.shuffle(sigma);
    return fn::or_of({f0, fn::permute(dnf, sigma)});
}

namespace {

// Iterate all n-bit masks of a given popcount (Gosper's hack).
template <typename Fn>
void for_each_level_mask(int n, int level, Fn&& fn) {
    if (level == 0) {
        fn(0u);
        return;
    }
    std::uint32_t v = (1u << level) - 1;
    std::uint32_t limit = 1u << n;
    while (v < limit) {
        fn(v);
        std::uint32_t c = v & static_cast<std::uint32_t>(-static_cast<std::int32_t>(v));
        std::uint32_t r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
        if (r == 0)
            break;  // wrapped
    }
}

}  // namespace

ThinnessReport measure_thinness(const FunctionSpec& spec, int level, long long samples, Rng& rng) {
    if (level < 0 || level > spec.n)
        throw std::invalid_argument("measure_thinness: level out of range");
    if (samples < 1)
        throw std::invalid_argument("measure_thinness: samples must be >= 1");
    ThinnessReport rep;
    rep.level = level;
    double total = std::exp(log_choose(spec.n, level));
    if (spec.n <= 30 && total <= 1e6) {
        long long ones = 0, count = 0;
        for_each_level_mask(spec.n, level, [&](std::uint32_t mask) {
            ++count;
            if (eval_spec(spec, Point::from_mask(spec.n, mask)))
                ++ones;
        });
        rep.exact = true;
        rep.samples = count;
        rep.estimate = count > 0 ? static_cast<double>(ones) / count : 0.0;
        rep.std_error = 0.0;
        return rep;
    }
    long long ones = 0;
    for (long long i = 0; i < samples; ++i)
        if (eval_spec(spec, random_point_at_level(spec.n, level, rng)))
            ++ones;
    rep.exact = false;
    rep.samples = samples;
    rep.estimate = static_cast<double>(ones) / samples;
    rep.std_error = std::sqrt(rep.estimate * (1.0 - rep.estimate) / samples);
    return rep;
}

DistinguishPoint distinguisher_experiment(const FamilySpec& d2, long long q, long long trials,
                                          Rng& rng) {
    if (q < 0)
        throw std::invalid_argument("distinguisher_experiment: q must be >= 0");
    if (trials < 1)
        throw std::invalid_argument("distinguisher_experiment: trials must be >= 1");
    FamilySpec r = d2.resolved();
    if (r.kind == FamilyKind::D1)
        throw std::invalid_argument("distinguisher_experiment: needs a D2 family");
    int T = family_threshold(r);

    // Family-average thinness at the threshold level (the union-bound term).
    const int thin_draws = 64;
    double thin = 0.0;
    for (int i = 0; i < thin_draws; ++i) {
        SpecPtr f = draw_family(r, rng);
        thin += measure_thinness(*f, T, 4096, rng).estimate;
    }
    thin /= thin_draws;

    SpecPtr f0 = make_f0(r.n, r.C1);
    long long correct = 0;
    for (long long t = 0; t < trials; ++t) {
        bool hidden_d2 = rng.bernoulli(0.5);
        SpecPtr f = hidden_d2 ? draw_family(r, rng) : f0;
        bool saw_one = false;
        for (long long j = 0; j < q && !saw_one; ++j)
            saw_one = eval_spec(*f, random_point_at_level(r.n, T, rng));
        bool guess_d2 = saw_one;
        if (guess_d2 == hidden_d2)
            ++correct;
    }

    DistinguishPoint p;
    p.q = q;
    p.trials = trials;
    p.success_rate = static_cast<double>(correct) / trials;
    p.thinness = thin;
    p.bound = 0.5 + static_cast<double>(q) * thin;
    p.std_error = std::sqrt(p.success_rate * (1.0 - p.success_rate) / trials);
    p.vacuous = p.bound >= 1.0;
    return p;
}

SpecPtr draw_h_alpha(int n, double alpha, Rng& rng) {
    if (n < 1 || n > 24)
        throw DimensionError("draw_h_alpha: requires n <= 24 (explicit table)");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("draw_h_alpha: alpha must be in [0, 1]");
    std::uint64_t size = 1ull << n;
    auto ones = static_cast<std::uint64_t>(std::llround(alpha * static_cast<double>(size)));
    if (ones > size)
        ones = size;
    // Reservoir-free exact placement: a partial Fisher-Yates over point indices.
    std::vector<std::uint32_t> idx(size);
    for (std::uint64_t i = 0; i < size; ++i)
        idx[i] = static_cast<std::uint32_t>(i);
    std::vector<std::uint64_t> words(static_cast<std::size_t>((size + 63) / 64), 0);
    for (std::uint64_t i = 0; i < ones; ++i) {
        std::uint64_t j = i + rng.below(size - i);
        std::swap(idx[i], idx[j]);
        words[idx[i] >> 6] |= 1ull << (idx[i] & 63);
    }
    return fn::truth_table_fn(n, words);
}

FamilyProperties verify_family_properties(const FamilySpec& spec, long long sample_budget,
                                          Rng& rng) {
    FamilySpec r = spec.resolved();
    SpecPtr f = draw_family(r, rng);
    FamilyProperties out;
    out.delta = r.delta;

    double root_n = std::sqrt(static_cast<double>(r.n));
    double scale = std::pow(static_cast<double>(r.n), -r.C2);
    out.target_bias = scale;
    out.target_influence = root_n * scale;
    out.target_ns = (r.delta <= 1.0 / root_n) ? r.delta * root_n * scale : scale;

    if (r.n <= 20) {
        exact::TruthTable table = exact::truth_table(*f);
        out.bias = exact::exact_bias(table);
        auto spec_f = exact::fourier_spectrum(table);
        out.influence = spec_f.influence();
        out.ns = spec_f.ns(r.delta);
        out.exact = true;
        return out;
    }
    if (sample_budget < 1)
        throw std::invalid_argument("verify_family_properties: sample budget must be >= 1");
    long long b_ones = 0, i_hits = 0, ns_hits = 0;
    for (long long t = 0; t < sample_budget; ++t) {
        Point x = random_point(r.n, rng);
        if (eval_spec(*f, x))
            ++b_ones;
        Point xf = x;
        xf.flip(static_cast<int>(rng.below(static_cast<std::uint64_t>(r.n))));
        if (eval_spec(*f, x) != eval_spec(*f, xf))
            ++i_hits;
        Point z = x;
        for (int i = 0; i < r.n; ++i)
            if (rng.bernoulli(r.delta))
                z.flip(i);
        if (eval_spec(*f, x) != eval_spec(*f, z))
            ++ns_hits;
    }
    out.bias = static_cast<double>(b_ones) / sample_budget;
    out.influence = static_cast<double>(r.n) * i_hits / sample_budget;
    out.ns = static_cast<double>(ns_hits) / sample_budget;
    out.exact = false;
    return out;
}

std::string serialize_family(const FamilySpec& spec) {
    json j;
    j["family"]["kind"] = to_string(spec.kind);
    j["family"]["n"] = spec.n;
    j["family"]["C1"] = spec.C1;
    j["family"]["C2"] = spec.C2;
    j["family"]["num_clauses"] = spec.num_clauses;
    j["family"]["clause_width"] = spec.clause_width;
    j["family"]["delta"] = spec.delta;
    return j.dump();
}

FamilySpec deserialize_family(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("family spec: ") + e.what(), static_cast<long>(e.byte));
    }
    if (!j.contains("family") || !j["family"].is_object())
        throw ParseError("family spec: missing 'family' header");
    const json& f = j["family"];
    FamilySpec spec;
    if (!f.contains("kind") || !f.contains("n"))
        throw ParseError("family spec: needs 'kind' and 'n'");
    spec.kind = family_kind_from_string(f["kind"].get<std::string>());
    spec.n = f["n"].get<int>();
    if (f.contains("C1"))
        spec.C1 = f["C1"].get<double>();
    if (f.contains("C2"))
        spec.C2 = f["C2"].get<double>();
    if (f.contains("num_clauses"))
        spec.num_clauses = f["num_clauses"].get<int>();
    if (f.contains("clause_width"))
        spec.clause_width = f["clause_width"].get<int>();
    if (f.contains("delta"))
        spec.delta = f["delta"].get<double>();
    return spec;
}

}  // namespace nsprobe::lb
