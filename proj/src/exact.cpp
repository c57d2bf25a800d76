#include "nsprobe/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nsprobe/errors.hpp"

namespace nsprobe::exact {

namespace {

constexpr int kFourierMaxN = 26;
constexpr int kDirectNsMaxN = 12;
constexpr int kProcessMaxN = 6;

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i)
        f *= i;
    return f;
}

}  // namespace

std::uint64_t TruthTable::count_ones() const {
    std::uint64_t c = 0;
    for (std::uint64_t w : words)
        c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
}

TruthTable truth_table(const FunctionSpec& spec) {
    if (spec.n > 30)
        throw DimensionError("truth_table: requires n <= 30");
    TruthTable t;
    t.n = spec.n;
    std::uint64_t size = t.size();
    t.words.assign((size + 63) / 64, 0);
    if (spec.kind == FunctionSpec::Kind::TruthTable) {
        t.words = spec.table;
        return t;
    }
    for (std::uint64_t idx = 0; idx < size; ++idx)
        if (eval_spec(spec, Point::from_mask(spec.n, idx)))
            t.words[idx >> 6] |= 1ull << (idx & 63);
    return t;
}

double exact_bias(const TruthTable& t) {
    return static_cast<double>(t.count_ones()) / std::exp2(t.n);
}

std::uint64_t count_influential_edges(const TruthTable& t) {
    std::uint64_t count = 0;
    std::uint32_t size = static_cast<std::uint32_t>(t.size());
    for (std::uint32_t idx = 0; idx < size; ++idx) {
        bool fv = t.get(idx);
        for (int b = 0; b < t.n; ++b)
            if (!(idx & (1u << b)) && fv != t.get(idx | (1u << b)))
                ++count;
    }
    return count;
}

double influence_edge_scan(const TruthTable& t) {
    return static_cast<double>(count_influential_edges(t)) / std::exp2(t.n - 1);
}

FourierSpectrum fourier_spectrum(const TruthTable& t) {
    if (t.n > kFourierMaxN)
        throw DimensionError("fourier_spectrum: requires n <= 26 (memory)");
    std::uint64_t size = t.size();
    FourierSpectrum s;
    s.n = t.n;
    s.ghat.resize(size);
    for (std::uint64_t i = 0; i < size; ++i)
        s.ghat[i] = t.get(static_cast<std::uint32_t>(i)) ? -1.0 : 1.0;
    // In-place butterfly. Intermediate values are integers below 2^53, so the
    // transform of a +/-1 vector is exact.
    for (std::uint64_t h = 1; h < size; h <<= 1)
        for (std::uint64_t i = 0; i < size; i += (h << 1))
            for (std::uint64_t j = i; j < i + h; ++j) {
                double a = s.ghat[j];
                double b = s.ghat[j + h];
                s.ghat[j] = a + b;
                s.ghat[j + h] = a - b;
            }
    double inv = 1.0 / static_cast<double>(size);
    s.level_weight.assign(static_cast<std::size_t>(t.n) + 1, 0.0);
    for (std::uint64_t mask = 0; mask < size; ++mask) {
        s.ghat[mask] *= inv;
        s.level_weight[static_cast<std::size_t>(std::popcount(mask))] += s.ghat[mask] * s.ghat[mask];
    }
    return s;
}

double FourierSpectrum::parseval() const {
    double acc = 0.0;
    for (double w : level_weight)
        acc += w;
    return acc;
}

double FourierSpectrum::influence() const {
    double acc = 0.0;
    for (std::size_t k = 1; k < level_weight.size(); ++k)
        acc += static_cast<double>(k) * level_weight[k];
    return acc;
}

double FourierSpectrum::ns(double delta) const {
    if (!(delta > 0.0) || delta > 0.5)
        throw std::invalid_argument("FourierSpectrum::ns: delta must be in (0, 1/2]");
    double r = 1.0 - 2.0 * delta;
    double acc = 0.0;
    double rpow = 1.0;
    for (std::size_t k = 0; k < level_weight.size(); ++k) {
        acc += (1.0 - rpow) * level_weight[k];
        rpow *= r;
    }
    return 0.5 * acc;
}

double FourierSpectrum::stability(double rho) const {
    if (rho < -1.0 || rho > 1.0)
        throw std::invalid_argument("FourierSpectrum::stability: rho must be in [-1, 1]");
    double acc = 0.0;
    double rpow = 1.0;
    for (std::size_t k = 0; k < level_weight.size(); ++k) {
        acc += rpow * level_weight[k];
        rpow *= rho;
    }
    return acc;
}

InfluencePair exact_influence(const TruthTable& t) {
    return {influence_edge_scan(t), fourier_spectrum(t).influence()};
}

double exact_ns(const TruthTable& t, double delta) { return fourier_spectrum(t).ns(delta); }

double exact_ns_direct(const TruthTable& t, double delta) {
    if (t.n > kDirectNsMaxN)
        throw DimensionError("exact_ns_direct: O(4^n) sum requires n <= 12");
    if (!(delta > 0.0) || delta > 0.5)
        throw std::invalid_argument("exact_ns_direct: delta must be in (0, 1/2]");
    int n = t.n;
    std::uint32_t size = static_cast<std::uint32_t>(t.size());
    std::vector<double> pw(static_cast<std::size_t>(n) + 1);
    for (int d = 0; d <= n; ++d)
        pw[static_cast<std::size_t>(d)] = std::pow(delta, d) * std::pow(1.0 - delta, n - d);
    double acc = 0.0;
    for (std::uint32_t x = 0; x < size; ++x) {
        bool fx = t.get(x);
        for (std::uint32_t z = 0; z < size; ++z)
            if (fx != t.get(z))
                acc += pw[static_cast<std::size_t>(std::popcount(x ^ z))];
    }
    return acc / static_cast<double>(size);
}

double exact_stability(const TruthTable& t, double rho) { return fourier_spectrum(t).stability(rho); }

namespace {

struct ProcessAccumulator {
    std::map<std::pair<std::uint32_t, int>, std::pair<double, double>> per_edge;  // p_e, q_e numerator
};

}  // namespace

ProcessDExact process_d_exact(const FunctionSpec& spec, double delta, double t1, int t2) {
    int n = spec.n;
    if (n > kProcessMaxN)
        throw DimensionError("process_d_exact: full enumeration requires n <= 6");
    if (!(delta > 0.0) || delta > 0.5)
        throw std::invalid_argument("process_d_exact: delta must be in (0, 1/2]");
    if (t2 < 1)
        throw std::invalid_argument("process_d_exact: t2 must be >= 1");

    TruthTable table = truth_table(spec);
    std::uint32_t size = static_cast<std::uint32_t>(table.size());
    std::uint32_t full = size - 1;
    double px = 1.0 / static_cast<double>(size);

    std::vector<double> dp(static_cast<std::size_t>(n) + 1), qp(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        dp[static_cast<std::size_t>(k)] = std::pow(delta, k);
        qp[static_cast<std::size_t>(k)] = std::pow(1.0 - delta, k);
    }

    ProcessDExact out;
    out.n = n;
    out.delta = delta;
    out.t1 = t1;
    out.t2 = t2;
    ProcessAccumulator acc;

    double ns_half = 0.0;
    double p_ab_direct = 0.0;

    for (std::uint32_t x = 0; x < size; ++x) {
        if (!table.get(x))
            continue;  // monotone: no influential crossing and f(x)=1 fails
        std::uint32_t s1 = x;
        std::uint32_t s0 = full & ~x;
        int n1 = std::popcount(s1);
        int n0 = std::popcount(s0);

        // Phase-1 flip sets (submasks of s1, including empty).
        std::uint32_t a = s1;
        while (true) {
            int ka = std::popcount(a);
            double prob_a = dp[static_cast<std::size_t>(ka)] * qp[static_cast<std::size_t>(n1 - ka)];
            std::uint32_t y = x & ~a;

            // Phase 2 cares only about the final point, not the order.
            double g0 = 0.0;
            std::uint32_t b = s0;
            while (true) {
                int kb = std::popcount(b);
                if (!table.get(y | b))
                    g0 += dp[static_cast<std::size_t>(kb)] * qp[static_cast<std::size_t>(n0 - kb)];
                if (b == 0)
                    break;
                b = (b - 1) & s0;
            }
            ns_half += px * prob_a * g0;

            if (!table.get(y)) {
                // The path crosses an influential edge; which one depends on
                // the traversal order, so enumerate orders of the flip set.
                std::vector<int> coords;
                for (int c = 0; c < n; ++c)
                    if (a & (1u << c))
                        coords.push_back(c);
                double w_order = px * prob_a / factorial(ka);
                std::sort(coords.begin(), coords.end());
                do {
                    std::uint32_t cur = x;
                    int depth = -1;
                    std::uint32_t lower = 0;
                    int edge_coord = -1;
                    int transitions = 0;
                    bool prev = true;  // f(x) = 1
                    for (int j = 0; j < ka; ++j) {
                        std::uint32_t nxt = cur & ~(1u << coords[static_cast<std::size_t>(j)]);
                        bool fv = table.get(nxt);
                        if (prev && !fv) {
                            ++transitions;
                            depth = j;  // L(x) - L(v1) edges before the crossing
                            lower = nxt;
                            edge_coord = coords[static_cast<std::size_t>(j)];
                        }
                        if (!prev && fv)
                            throw std::invalid_argument(
                                "process_d_exact: value increased along a descending path; "
                                "the function is not monotone");
                        prev = fv;
                        cur = nxt;
                    }
                    if (transitions != 1)
                        throw std::logic_error("process_d_exact: expected exactly one crossing");
                    int lower_level = std::popcount(lower);
                    bool e1 = depth >= t2;
                    bool e2 = !in_middle_band(n, t1, lower_level, lower_level + 1);
                    out.pr_E1 += w_order * (e1 ? 1.0 : 0.0);
                    out.pr_E2 += w_order * (e2 ? 1.0 : 0.0);
                    if (!e1 && !e2) {
                        out.p_A += w_order;
                        p_ab_direct += w_order * g0;
                        auto& slot = acc.per_edge[{lower, edge_coord}];
                        slot.first += w_order;
                        slot.second += w_order * g0;
                    }
                } while (std::next_permutation(coords.begin(), coords.end()));
            }

            if (a == 0)
                break;
            a = (a - 1) & s1;
        }
    }

    out.ns = 2.0 * ns_half;
    out.p_B = out.p_A > 0.0 ? p_ab_direct / out.p_A : 0.0;

    // Every influential edge inside the band, whether or not a path hit it
    // (p_e is positive for all of them; this also exposes the enumeration).
    for (std::uint32_t lower = 0; lower < size; ++lower) {
        bool fl = table.get(lower);
        for (int c = 0; c < n; ++c) {
            if (lower & (1u << c))
                continue;
            std::uint32_t up = lower | (1u << c);
            if (fl == table.get(up))
                continue;
            int ll = std::popcount(lower);
            if (!in_middle_band(n, t1, ll, ll + 1))
                continue;
            EdgeStats es;
            es.edge = Edge{Point::from_mask(n, lower), c};
            auto it = acc.per_edge.find({lower, c});
            if (it != acc.per_edge.end()) {
                es.p_e = it->second.first;
                es.q_e = it->second.first > 0.0 ? it->second.second / it->second.first : 0.0;
            }
            out.sum_pe += es.p_e;
            out.sum_pe_qe += es.p_e * es.q_e;
            out.middle_edges.push_back(std::move(es));
        }
    }
    return out;
}

std::string path_pair_key(const Point& x, const std::vector<int>& p1_flips,
                          const std::vector<int>& p2_flips) {
    std::ostringstream os;
    os << x.to_string() << '|';
    for (std::size_t i = 0; i < p1_flips.size(); ++i)
        os << (i ? "," : "") << p1_flips[i];
    os << '|';
    for (std::size_t i = 0; i < p2_flips.size(); ++i)
        os << (i ? "," : "") << p2_flips[i];
    return os.str();
}

std::map<std::string, double> conditional_path_law(const FunctionSpec& spec, double delta,
                                                   double t1, int t2, const Edge& e) {
    int n = spec.n;
    if (n > kProcessMaxN)
        throw DimensionError("conditional_path_law: requires n <= 6");
    TruthTable table = truth_table(spec);
    std::uint32_t size = static_cast<std::uint32_t>(table.size());
    std::uint32_t full = size - 1;
    std::uint32_t lower_mask = static_cast<std::uint32_t>(e.lower.mask());
    std::uint32_t upper_mask = lower_mask | (1u << e.coord);
    int lower_level = std::popcount(lower_mask);
    if (!in_middle_band(n, t1, lower_level, lower_level + 1))
        throw std::invalid_argument("conditional_path_law: edge must lie in the middle band");
    if (table.get(lower_mask) || !table.get(upper_mask))
        throw std::invalid_argument("conditional_path_law: edge is not influential");

    std::vector<double> dp(static_cast<std::size_t>(n) + 1), qp(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        dp[static_cast<std::size_t>(k)] = std::pow(delta, k);
        qp[static_cast<std::size_t>(k)] = std::pow(1.0 - delta, k);
    }
    double px = 1.0 / static_cast<double>(size);

    std::map<std::string, double> law;
    double total = 0.0;

    for (std::uint32_t x = 0; x < size; ++x) {
        if ((x & upper_mask) != upper_mask)
            continue;  // the path can only cross e from above it
        std::uint32_t s1 = x;
        std::uint32_t s0 = full & ~x;
        int n1 = std::popcount(s1);
        int n0 = std::popcount(s0);
        Point xp = Point::from_mask(n, x);

        std::uint32_t a = s1;
        while (true) {
            int ka = std::popcount(a);
            if (a == 0) {
                break;  // empty flip set cannot cross anything (handled below)
            }
            double prob_a = dp[static_cast<std::size_t>(ka)] * qp[static_cast<std::size_t>(n1 - ka)];
            std::uint32_t y = x & ~a;
            if (table.get(y)) {  // no influential crossing at all
                a = (a - 1) & s1;
                continue;
            }
            std::vector<int> coords;
            for (int c = 0; c < n; ++c)
                if (a & (1u << c))
                    coords.push_back(c);
            double w_order = px * prob_a / factorial(ka);
            std::sort(coords.begin(), coords.end());
            do {
                // Locate the crossing on this ordering.
                std::uint32_t cur = x;
                int depth = -1;
                std::uint32_t lower_hit = 0;
                int coord_hit = -1;
                bool prev = true;
                for (int j = 0; j < ka; ++j) {
                    std::uint32_t nxt = cur & ~(1u << coords[static_cast<std::size_t>(j)]);
                    bool fv = table.get(nxt);
                    if (prev && !fv) {
                        depth = j;
                        lower_hit = nxt;
                        coord_hit = coords[static_cast<std::size_t>(j)];
                    }
                    prev = fv;
                    cur = nxt;
                }
                if (lower_hit != lower_mask || coord_hit != e.coord)
                    continue;  // crossed some other influential edge
                if (depth >= t2)
                    continue;  // bad event: too deep before the hit

                // Phase 2 over the zero set of x, order enumerated.
                std::uint32_t b = s0;
                while (true) {
                    int kb = std::popcount(b);
                    double prob_b = dp[static_cast<std::size_t>(kb)] * qp[static_cast<std::size_t>(n0 - kb)];
                    std::vector<int> bcoords;
                    for (int c = 0; c < n; ++c)
                        if (b & (1u << c))
                            bcoords.push_back(c);
                    double w2 = w_order * prob_b / factorial(kb);
                    std::sort(bcoords.begin(), bcoords.end());
                    do {
                        law[path_pair_key(xp, coords, bcoords)] += w2;
                        total += w2;
                    } while (std::next_permutation(bcoords.begin(), bcoords.end()));
                    if (b == 0)
                        break;
                    b = (b - 1) & s0;
                }
            } while (std::next_permutation(coords.begin(), coords.end()));
            a = (a - 1) & s1;
        }
    }
    if (total <= 0.0)
        throw std::logic_error("conditional_path_law: conditioning event has zero mass");
    for (auto& kv : law)
        kv.second /= total;
    return law;
}

}  // namespace nsprobe::exact
