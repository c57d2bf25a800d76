#include "nsprobe/fnspec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nsprobe/errors.hpp"

namespace nsprobe {

using json = nlohmann::json;

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok)
        throw std::invalid_argument(msg);
}

std::shared_ptr<FunctionSpec> node(FunctionSpec::Kind kind, int n) {
    auto s = std::make_shared<FunctionSpec>();
    s->kind = kind;
    s->n = n;
    return s;
}

}  // namespace

namespace fn {

SpecPtr constant(int n, bool value) {
    require(n >= 1, "constant: n must be >= 1");
    auto s = node(FunctionSpec::Kind::Constant, n);
    s->value = value;
    return s;
}

SpecPtr dictator(int n, int index) {
    require(n >= 1, "dictator: n must be >= 1");
    require(index >= 0 && index < n, "dictator: index out of range");
    auto s = node(FunctionSpec::Kind::Dictator, n);
    s->index = index;
    return s;
}

SpecPtr parity(int n) {
    require(n >= 1, "parity: n must be >= 1");
    return node(FunctionSpec::Kind::Parity, n);
}

SpecPtr majority(int n) {
    require(n >= 1, "majority: n must be >= 1");
    return node(FunctionSpec::Kind::Majority, n);
}

SpecPtr threshold(int n, int t) {
    require(n >= 1, "threshold: n must be >= 1");
    require(t >= 0 && t <= n, "threshold: t must be in [0, n]");
    auto s = node(FunctionSpec::Kind::Threshold, n);
    s->threshold = t;
    return s;
}

SpecPtr dnf(int n, std::vector<std::vector<int>> clauses) {
    require(n >= 1, "dnf: n must be >= 1");
    for (auto& clause : clauses) {
        require(!clause.empty(), "dnf: empty clause");
        std::sort(clause.begin(), clause.end());
        for (std::size_t i = 0; i < clause.size(); ++i) {
            require(clause[i] >= 0 && clause[i] < n, "dnf: coordinate out of range");
            require(i == 0 || clause[i] != clause[i - 1], "dnf: duplicate coordinate in clause");
        }
    }
    auto s = node(FunctionSpec::Kind::Dnf, n);
    s->clauses = std::move(clauses);
    return s;
}

SpecPtr truth_table_fn(int n, const std::vector<std::uint64_t>& packed_bits) {
    require(n >= 1 && n <= 30, "truth_table: n must be in [1, 30]");
    std::size_t words = (std::size_t{1} << n) <= 64 ? 1 : ((std::size_t{1} << n) / 64);
    require(packed_bits.size() == words, "truth_table: wrong table size");
    auto s = node(FunctionSpec::Kind::TruthTable, n);
    s->table = packed_bits;
    if (n < 6) {
        std::uint64_t mask = (1ull << (std::size_t{1} << n)) - 1;
        s->table[0] &= mask;
    }
    return s;
}

SpecPtr or_of(std::vector<SpecPtr> children) {
    require(!children.empty(), "or: needs at least one child");
    int n = children.front()->n;
    for (const auto& c : children)
        require(c->n == n, "or: children have mismatched dimensions");
    auto s = node(FunctionSpec::Kind::Or, n);
    s->children = std::move(children);
    return s;
}

SpecPtr truncate(SpecPtr child, int t) {
    require(child != nullptr, "truncate: null child");
    require(t >= 0 && t <= child->n, "truncate: t must be in [0, n]");
    auto s = node(FunctionSpec::Kind::Truncate, child->n);
    s->threshold = t;
    s->children.push_back(std::move(child));
    return s;
}

SpecPtr permute(SpecPtr child, std::vector<int> sigma) {
    require(child != nullptr, "permute: null child");
    int n = child->n;
    require(static_cast<int>(sigma.size()) == n, "permute: sigma must have length n");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int v : sigma) {
        require(v >= 0 && v < n, "permute: sigma entry out of range");
        require(!seen[static_cast<std::size_t>(v)], "permute: sigma is not a permutation");
        seen[static_cast<std::size_t>(v)] = true;
    }
    auto s = node(FunctionSpec::Kind::Permute, n);
    s->perm = std::move(sigma);
    s->children.push_back(std::move(child));
    return s;
}

}  // namespace fn

bool eval_spec(const FunctionSpec& spec, const Point& x) {
    if (x.n() != spec.n)
        throw DimensionError("eval_spec: point dimension does not match the function");
    switch (spec.kind) {
        case FunctionSpec::Kind::Constant:
            return spec.value;
        case FunctionSpec::Kind::Dictator:
            return x.get(spec.index);
        case FunctionSpec::Kind::Parity:
            return (x.level() & 1) != 0;
        case FunctionSpec::Kind::Majority:
            return 2 * x.level() > spec.n;
        case FunctionSpec::Kind::Threshold:
            return x.level() > spec.threshold;
        case FunctionSpec::Kind::Dnf: {
            for (const auto& clause : spec.clauses) {
                bool all = true;
                for (int c : clause)
                    if (!x.get(c)) {
                        all = false;
                        break;
                    }
                if (all)
                    return true;
            }
            return false;
        }
        case FunctionSpec::Kind::TruthTable:
            return spec.table_get(x.index());
        case FunctionSpec::Kind::Or: {
            for (const auto& c : spec.children)
                if (eval_spec(*c, x))
                    return true;
            return false;
        }
        case FunctionSpec::Kind::Truncate:
            if (x.level() > spec.threshold)
                return true;
            return eval_spec(*spec.children.front(), x);
        case FunctionSpec::Kind::Permute: {
            Point y(spec.n);
            for (int i = 0; i < spec.n; ++i)
                if (x.get(spec.perm[static_cast<std::size_t>(i)]))
                    y.set(i);
            return eval_spec(*spec.children.front(), y);
        }
    }
    throw std::logic_error("eval_spec: unknown node kind");
}

int f0_threshold(int n, double C1) {
    require(n >= 2, "f0_threshold: n must be >= 2");
    require(C1 > 0.0, "f0_threshold: C1 must be > 0");
    double target = std::pow(static_cast<double>(n), -C1);
    // Strict upper tail Pr[L(x) > T], accumulated from the top for accuracy.
    for (int T = n / 2 + 1; T <= n; ++T) {
        long double tail = 0.0L;
        for (int l = n; l > T; --l)
            tail += std::exp(static_cast<long double>(log_choose(n, l)) -
                             static_cast<long double>(n) * std::log(2.0L));
        if (static_cast<double>(tail) <= target)
            return T;
    }
    throw std::invalid_argument("f0_threshold: no feasible threshold at this n and C1");
}

SpecPtr make_f0(int n, double C1) { return fn::threshold(n, f0_threshold(n, C1)); }

SpecPtr make_random_dnf(int n, int num_clauses, int clause_width, Rng& rng) {
    require(num_clauses >= 0, "make_random_dnf: num_clauses must be >= 0");
    require(clause_width >= 1 && clause_width <= n, "make_random_dnf: clause_width must be in [1, n]");
    if (num_clauses == 0)
        return fn::constant(n, false);
    std::vector<std::vector<int>> clauses;
    clauses.reserve(static_cast<std::size_t>(num_clauses));
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    for (int c = 0; c < num_clauses; ++c) {
        // clause_width distinct coordinates via partial Fisher-Yates
        for (int i = 0; i < clause_width; ++i) {
            std::size_t j = static_cast<std::size_t>(i) +
                            static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        }
        clauses.emplace_back(idx.begin(), idx.begin() + clause_width);
    }
    return fn::dnf(n, std::move(clauses));
}

DnfShape paper_shape(int n, double C2) {
    require(n >= 1 && n <= 36, "paper_shape: feasible only for n <= 36");
    require(C2 >= 0.0, "paper_shape: C2 must be >= 0");
    double raw = std::exp2(std::sqrt(static_cast<double>(n))) / std::pow(static_cast<double>(n), C2);
    int clauses = static_cast<int>(std::ceil(raw));
    int width = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    return {std::max(1, clauses), std::min(width, n)};
}

bool monotonicity_check(const FunctionSpec& spec) {
    if (spec.n > 20)
        throw DimensionError("monotonicity_check: exhaustive scan requires n <= 20");
    int n = spec.n;
    std::uint32_t size = 1u << n;
    std::vector<std::uint8_t> values(size);
    for (std::uint32_t i = 0; i < size; ++i)
        values[i] = eval_spec(spec, Point::from_mask(n, i)) ? 1 : 0;
    for (std::uint32_t i = 0; i < size; ++i)
        for (int b = 0; b < n; ++b)
            if (!(i & (1u << b)) && values[i] > values[i | (1u << b)])
                return false;
    return true;
}

namespace {

json spec_to_json(const FunctionSpec& s) {
    json j;
    switch (s.kind) {
        case FunctionSpec::Kind::Constant:
            j["fn"] = "const";
            j["n"] = s.n;
            j["value"] = s.value ? 1 : 0;
            break;
        case FunctionSpec::Kind::Dictator:
            j["fn"] = "dictator";
            j["n"] = s.n;
            j["index"] = s.index;
            break;
        case FunctionSpec::Kind::Parity:
            j["fn"] = "parity";
            j["n"] = s.n;
            break;
        case FunctionSpec::Kind::Majority:
            j["fn"] = "majority";
            j["n"] = s.n;
            break;
        case FunctionSpec::Kind::Threshold:
            j["fn"] = "threshold";
            j["n"] = s.n;
            j["t"] = s.threshold;
            break;
        case FunctionSpec::Kind::Dnf:
            j["fn"] = "dnf";
            j["n"] = s.n;
            j["clauses"] = s.clauses;
            break;
        case FunctionSpec::Kind::TruthTable: {
            j["fn"] = "table";
            j["n"] = s.n;
            // hex string, low nibble first (16 points per char group of 4 bits)
            std::uint32_t size = 1u << s.n;
            std::string hex;
            hex.reserve((size + 3) / 4);
            for (std::uint32_t base = 0; base < size; base += 4) {
                int nib = 0;
                for (int k = 0; k < 4 && base + static_cast<std::uint32_t>(k) < size; ++k)
                    nib |= (s.table_get(base + static_cast<std::uint32_t>(k)) ? 1 : 0) << k;
                hex.push_back("0123456789abcdef"[nib]);
            }
            j["bits"] = hex;
            break;
        }
        case FunctionSpec::Kind::Or: {
            j["fn"] = "or";
            j["children"] = json::array();
            for (const auto& c : s.children)
                j["children"].push_back(spec_to_json(*c));
            break;
        }
        case FunctionSpec::Kind::Truncate:
            j["fn"] = "truncate";
            j["t"] = s.threshold;
            j["child"] = spec_to_json(*s.children.front());
            break;
        case FunctionSpec::Kind::Permute:
            j["fn"] = "permute";
            j["perm"] = s.perm;
            j["child"] = spec_to_json(*s.children.front());
            break;
    }
    return j;
}

[[noreturn]] void fail_parse(const std::string& where, const std::string& why) {
    throw ParseError("function DSL: " + where + ": " + why);
}

int get_int(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number_integer())
        fail_parse(where, std::string("missing or non-integer field '") + key + "'");
    return j[key].get<int>();
}

SpecPtr spec_from_json(const json& j, const std::string& where) {
    if (!j.is_object())
        fail_parse(where, "expected an object");
    if (!j.contains("fn") || !j["fn"].is_string())
        fail_parse(where, "missing 'fn' field");
    std::string kind = j["fn"].get<std::string>();
    try {
        if (kind == "const")
            return fn::constant(get_int(j, "n", where), get_int(j, "value", where) != 0);
        if (kind == "dictator")
            return fn::dictator(get_int(j, "n", where), get_int(j, "index", where));
        if (kind == "parity")
            return fn::parity(get_int(j, "n", where));
        if (kind == "majority")
            return fn::majority(get_int(j, "n", where));
        if (kind == "threshold")
            return fn::threshold(get_int(j, "n", where), get_int(j, "t", where));
        if (kind == "dnf") {
            if (!j.contains("clauses") || !j["clauses"].is_array())
                fail_parse(where, "dnf needs a 'clauses' array");
            std::vector<std::vector<int>> clauses;
            for (const auto& c : j["clauses"])
                clauses.push_back(c.get<std::vector<int>>());
            return fn::dnf(get_int(j, "n", where), std::move(clauses));
        }
        if (kind == "table") {
            int n = get_int(j, "n", where);
            if (n < 1 || n > 30)
                fail_parse(where, "table n out of range");
            if (!j.contains("bits") || !j["bits"].is_string())
                fail_parse(where, "table needs a 'bits' hex string");
            std::string hex = j["bits"].get<std::string>();
            std::uint64_t size = 1ull << n;
            if (hex.size() != (size + 3) / 4)
                fail_parse(where, "table bits length does not match 2^n");
            std::vector<std::uint64_t> words((size + 63) / 64, 0);
            for (std::size_t i = 0; i < hex.size(); ++i) {
                char ch = hex[i];
                int nib;
                if (ch >= '0' && ch <= '9')
                    nib = ch - '0';
                else if (ch >= 'a' && ch <= 'f')
                    nib = ch - 'a' + 10;
                else
                    fail_parse(where, "table bits must be lowercase hex");
                for (int k = 0; k < 4; ++k)
                    if (nib & (1 << k)) {
                        std::uint64_t idx = 4 * i + static_cast<std::uint64_t>(k);
                        if (idx < size)
                            words[idx >> 6] |= 1ull << (idx & 63);
                    }
            }
            return fn::truth_table_fn(n, words);
        }
        if (kind == "or") {
            if (!j.contains("children") || !j["children"].is_array() || j["children"].empty())
                fail_parse(where, "or needs a non-empty 'children' array");
            std::vector<SpecPtr> children;
            int i = 0;
            for (const auto& c : j["children"])
                children.push_back(spec_from_json(c, where + "/children[" + std::to_string(i++) + "]"));
            return fn::or_of(std::move(children));
        }
        if (kind == "truncate") {
            if (!j.contains("child"))
                fail_parse(where, "truncate needs a 'child'");
            auto child = spec_from_json(j["child"], where + "/child");
            return fn::truncate(std::move(child), get_int(j, "t", where));
        }
        if (kind == "permute") {
            if (!j.contains("child") || !j.contains("perm"))
                fail_parse(where, "permute needs 'child' and 'perm'");
            auto child = spec_from_json(j["child"], where + "/child");
            return fn::permute(std::move(child), j["perm"].get<std::vector<int>>());
        }
    } catch (const std::invalid_argument& e) {
        fail_parse(where, e.what());
    }
    fail_parse(where, "unknown node name '" + kind + "'");
}

}  // namespace

std::string serialize(const FunctionSpec& spec) {
    // nlohmann objects iterate in key order, so the dump is canonical.
    return spec_to_json(spec).dump();
}

SpecPtr deserialize(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("function DSL: ") + e.what(), static_cast<long>(e.byte));
    }
    return spec_from_json(j, "$");
}

SpecPtr load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open function file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace nsprobe
