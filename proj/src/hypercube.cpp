#include "nsprobe/hypercube.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsprobe/errors.hpp"

namespace nsprobe {

namespace {
int word_count(int n) { return (n + 63) / 64; }
}  // namespace

Point::Point(int n) : n_(n) {
    if (n < 1)
        throw std::invalid_argument("Point: dimension must be >= 1");
    if (n > 64)
        ext_.assign(word_count(n), 0);
}

Point Point::ones(int n) {
    Point p(n);
    auto w = p.words_mut();
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = ~0ull;
    int tail = n % 64;
    if (tail != 0)
        w[w.size() - 1] &= (~0ull >> (64 - tail));
    return p;
}

Point Point::from_mask(int n, std::uint64_t bits) {
    if (n > 64)
        throw std::invalid_argument("Point::from_mask: n must be <= 64");
    Point p(n);
    std::uint64_t hi = (n == 64) ? ~0ull : ((1ull << n) - 1);
    p.w0_ = bits & hi;
    return p;
}

std::span<const std::uint64_t> Point::words() const {
    if (n_ <= 64)
        return {&w0_, 1};
    return {ext_.data(), ext_.size()};
}

std::span<std::uint64_t> Point::words_mut() {
    if (n_ <= 64)
        return {&w0_, 1};
    return {ext_.data(), ext_.size()};
}

bool Point::get(int i) const {
    return (words()[static_cast<std::size_t>(i) / 64] >> (i % 64)) & 1ull;
}

void Point::set(int i) {
    words_mut()[static_cast<std::size_t>(i) / 64] |= (1ull << (i % 64));
}

void Point::clear(int i) {
    words_mut()[static_cast<std::size_t>(i) / 64] &= ~(1ull << (i % 64));
}

void Point::flip(int i) {
    words_mut()[static_cast<std::size_t>(i) / 64] ^= (1ull << (i % 64));
}

int Point::level() const {
    int c = 0;
    for (std::uint64_t w : words())
        c += std::popcount(w);
    return c;
}

bool Point::leq(const Point& other) const {
    if (n_ != other.n_)
        throw std::invalid_argument("Point::leq: dimension mismatch");
    auto a = words();
    auto b = other.words();
    for (std::size_t i = 0; i < a.size(); ++i)
        if ((a[i] & b[i]) != a[i])
            return false;
    return true;
}

std::vector<int> Point::set_coords() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(level()));
    for (int i = 0; i < n_; ++i)
        if (get(i))
            out.push_back(i);
    return out;
}

std::vector<int> Point::clear_coords() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n_ - level()));
    for (int i = 0; i < n_; ++i)
        if (!get(i))
            out.push_back(i);
    return out;
}

std::uint32_t Point::index() const {
    if (n_ > 30)
        throw DimensionError("Point::index: table indexing requires n <= 30");
    return static_cast<std::uint32_t>(w0_);
}

std::string Point::to_string() const {
    std::string s(static_cast<std::size_t>(n_), '0');
    for (int i = 0; i < n_; ++i)
        if (get(i))
            s[static_cast<std::size_t>(i)] = '1';
    return s;
}

bool Point::operator==(const Point& other) const {
    if (n_ != other.n_)
        return false;
    auto a = words();
    auto b = other.words();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i])
            return false;
    return true;
}

Point Edge::upper() const {
    Point p = lower;
    if (p.get(coord))
        throw std::invalid_argument("Edge: coord already set in lower endpoint");
    p.set(coord);
    return p;
}

Point Path::endpoint() const { return vertex(length()); }

Point Path::vertex(int k) const {
    Point p = start;
    for (int i = 0; i < k; ++i) {
        if (direction == Direction::descending)
            p.clear(flips[static_cast<std::size_t>(i)]);
        else
            p.set(flips[static_cast<std::size_t>(i)]);
    }
    return p;
}

std::vector<Point> Path::vertices() const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(length()) + 1);
    Point p = start;
    out.push_back(p);
    for (int f : flips) {
        if (direction == Direction::descending)
            p.clear(f);
        else
            p.set(f);
        out.push_back(p);
    }
    return out;
}

int level(const Point& p) { return p.level(); }

Point random_point(int n, Rng& rng) {
    if (n <= 64)
        return Point::from_mask(n, rng.u64());
    Point q(n);
    for (int i = 0; i < n; i += 64) {
        std::uint64_t w = rng.u64();
        for (int j = i; j < std::min(i + 64, n); ++j)
            if ((w >> (j - i)) & 1ull)
                q.set(j);
    }
    return q;
}

Point random_point_at_level(int n, int l, Rng& rng) {
    if (l < 0 || l > n)
        throw std::invalid_argument("random_point_at_level: level out of range");
    // Partial Fisher-Yates over the coordinates; first l slots get set.
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    Point p(n);
    for (int i = 0; i < l; ++i) {
        std::size_t j = static_cast<std::size_t>(i) +
                        static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        p.set(idx[static_cast<std::size_t>(i)]);
    }
    return p;
}

Path descending_walk(const Point& x, int steps, Rng& rng) {
    if (steps < 0)
        throw std::invalid_argument("descending_walk: steps must be >= 0");
    Path path{x, {}, Direction::descending};
    std::vector<int> set = x.set_coords();
    int take = std::min<int>(steps, static_cast<int>(set.size()));
    path.flips.reserve(static_cast<std::size_t>(take));
    for (int s = 0; s < take; ++s) {
        std::size_t j = static_cast<std::size_t>(rng.below(set.size()));
        path.flips.push_back(set[j]);
        set[j] = set.back();
        set.pop_back();
    }
    return path;
}

Path ascending_walk(const Point& v, int steps, Rng& rng) {
    if (steps < 0)
        throw std::invalid_argument("ascending_walk: steps must be >= 0");
    std::vector<int> clear = v.clear_coords();
    if (steps > static_cast<int>(clear.size()))
        throw std::invalid_argument("ascending_walk: steps exceed the number of clear coordinates");
    Path path{v, {}, Direction::ascending};
    path.flips.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        std::size_t j = static_cast<std::size_t>(rng.below(clear.size()));
        path.flips.push_back(clear[j]);
        clear[j] = clear.back();
        clear.pop_back();
    }
    return path;
}

Path phase1_walk(const Point& x, double delta, Rng& rng) {
    if (!(delta > 0.0) || delta > 0.5)
        throw std::invalid_argument("phase1_walk: delta must be in (0, 1/2]");
    std::vector<int> order = x.set_coords();
    rng.shuffle(order);
    Path path{x, {}, Direction::descending};
    for (int c : order)
        if (rng.bernoulli(delta))
            path.flips.push_back(c);
    return path;
}

Path phase2_walk(const Point& y, const std::vector<int>& zero_set, double delta, Rng& rng) {
    if (!(delta > 0.0) || delta > 0.5)
        throw std::invalid_argument("phase2_walk: delta must be in (0, 1/2]");
    for (int c : zero_set)
        if (y.get(c))
            throw std::invalid_argument("phase2_walk: zero_set coordinate is set in y");
    std::vector<int> order = zero_set;
    rng.shuffle(order);
    Path path{y, {}, Direction::ascending};
    for (int c : order)
        if (rng.bernoulli(delta))
            path.flips.push_back(c);
    return path;
}

double log_choose(int n, int k) {
    if (k < 0 || k > n)
        return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::uint64_t exact_binomial(int n, int k) {
    if (k < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (int i = 1; i <= k; ++i) {
        acc = acc * static_cast<unsigned>(n - k + i);
        acc /= static_cast<unsigned>(i);
        if (acc > static_cast<unsigned __int128>(~0ull))
            throw std::overflow_error("exact_binomial: value does not fit in 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
}

double binomial_pmf(int l, int k, double p) {
    if (k < 0 || k > l)
        return 0.0;
    if (p <= 0.0)
        return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0)
        return k == l ? 1.0 : 0.0;
    double lg = log_choose(l, k) + k * std::log(p) + (l - k) * std::log1p(-p);
    return std::exp(lg);
}

double phase1_length_tail(int l, int w, double delta) {
    if (l < 0 || w < 0)
        throw std::invalid_argument("phase1_length_tail: l and w must be >= 0");
    if (w == 0)
        return 1.0;
    if (w > l)
        return 0.0;
    // Sum the smaller side of the distribution for accuracy.
    long double acc = 0.0L;
    if (w > l / 2) {
        for (int k = w; k <= l; ++k)
            acc += static_cast<long double>(binomial_pmf(l, k, delta));
        return static_cast<double>(std::min<long double>(acc, 1.0L));
    }
    for (int k = 0; k < w; ++k)
        acc += static_cast<long double>(binomial_pmf(l, k, delta));
    return static_cast<double>(std::max<long double>(1.0L - acc, 0.0L));
}

bool in_middle_band(int n, double t1, int lower_level, int upper_level) {
    const double eps = 1e-9;  // levels are integers; absorb float fuzz at the boundary
    double lo = 0.5 * n - t1 - eps;
    double hi = 0.5 * n + t1 + eps;
    return lower_level >= lo && upper_level <= hi;
}

ContinuityResult continuity_check(int n, int l1, int l2, double xi) {
    if (!(0 <= l1 && l1 <= l2 && l2 <= n))
        throw std::invalid_argument("continuity_check: need 0 <= l1 <= l2 <= n");
    if (xi < 0.0 || xi > 1.0)
        throw std::invalid_argument("continuity_check: xi must be in [0, 1]");
    double ratio = std::exp(log_choose(n, l1) - log_choose(n, l2));
    bool within = (ratio >= 1.0 - xi) && (ratio <= 1.0 + xi);
    return {ratio, within};
}

}  // namespace nsprobe
