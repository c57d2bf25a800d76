#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsprobe/rng.hpp"

namespace nsprobe {

/// A vertex of {0,1}^n. One inline word covers n <= 64; larger dimensions
/// (sampling-only use) spill to a heap vector.
class Point {
  public:
    Point() = default;
    explicit Point(int n);

    static Point zeros(int n) { return Point(n); }
    static Point ones(int n);
    static Point from_mask(int n, std::uint64_t bits);  // n <= 64

    int n() const { return n_; }
    bool get(int i) const;
    void set(int i);
    void clear(int i);
    void flip(int i);

    /// Hamming weight L(x).
    int level() const;

    /// Coordinatewise partial order: *this <= other.
    bool leq(const Point& other) const;

    std::vector<int> set_coords() const;
    std::vector<int> clear_coords() const;

    /// Table index for n <= 30 (coordinate 0 is the least significant bit).
    std::uint32_t index() const;
    /// Low word (n <= 64).
    std::uint64_t mask() const { return w0_; }

    /// "b0 b1 ... b_{n-1}" without spaces, coordinate 0 first.
    std::string to_string() const;

    std::span<const std::uint64_t> words() const;
    bool operator==(const Point& other) const;
    bool operator!=(const Point& other) const { return !(*this == other); }

  private:
    std::span<std::uint64_t> words_mut();
    int n_ = 0;
    std::uint64_t w0_ = 0;
    std::vector<std::uint64_t> ext_;  // used only when n_ > 64
};

/// A hypercube edge, identified by its lower endpoint and the flipped
/// coordinate. The upper endpoint v1 = lower with `coord` set.
struct Edge {
    Point lower;
    int coord = 0;

    Point upper() const;
    int lower_level() const { return lower.level(); }
    int upper_level() const { return lower.level() + 1; }
    bool operator==(const Edge& other) const { return coord == other.coord && lower == other.lower; }
};

enum class Direction { descending, ascending };

/// A monotone path recorded as its start plus the flipped coordinates in
/// order. Descending paths clear bits; ascending paths set them.
struct Path {
    Point start;
    std::vector<int> flips;
    Direction direction = Direction::descending;

    int length() const { return static_cast<int>(flips.size()); }
    bool empty() const { return flips.empty(); }
    Point endpoint() const;
    /// Vertex after the first k flips (k = 0 gives the start).
    Point vertex(int k) const;
    /// All length()+1 vertices in order.
    std::vector<Point> vertices() const;
};

int level(const Point& p);

Point random_point(int n, Rng& rng);

/// Uniform over the C(n,l) points of weight l. Rejects l outside [0, n].
Point random_point_at_level(int n, int l, Rng& rng);

/// Uniform descending walk: each step clears a uniformly random set
/// coordinate. Stops early at all-zeros; |path| = min(steps, level(x)).
Path descending_walk(const Point& x, int steps, Rng& rng);

/// Uniform ascending walk; requires steps <= n - level(v).
Path ascending_walk(const Point& v, int steps, Rng& rng);

/// Phase 1 of the descending-ascending noise process: visit the set
/// coordinates of x in uniformly random order and clear each with
/// probability delta. The path records the flips that actually happen.
Path phase1_walk(const Point& x, double delta, Rng& rng);

/// Phase 2: visit `zero_set` in uniformly random order and set each with
/// probability delta. Every coordinate in zero_set must be clear in y.
Path phase2_walk(const Point& y, const std::vector<int>& zero_set, double delta, Rng& rng);

/// Pr[Binomial(l, delta) >= w]: the chance a Phase-1 path from level l has
/// length at least w.
double phase1_length_tail(int l, int w, double delta);

// --- binomial utilities ---

double log_choose(int n, int k);

/// Exact binomial coefficient; requires the value to fit in 64 bits
/// (n <= 62 always works).
std::uint64_t exact_binomial(int n, int k);

/// Pr[Binomial(l, p) = k].
double binomial_pmf(int l, int k, double p);

/// Band membership shared by the middle-edge predicate and the exact
/// process enumerator: both endpoint levels within [n/2 - t1, n/2 + t1].
bool in_middle_band(int n, double t1, int lower_level, int upper_level);

struct ContinuityResult {
    double ratio;  // C(n, l1) / C(n, l2)
    bool within;   // ratio in [1 - xi, 1 + xi]
};

/// Numeric check of the binomial-ratio continuity bound: computes
/// C(n,l1)/C(n,l2) via log-gamma and tests it against [1-xi, 1+xi].
ContinuityResult continuity_check(int n, int l1, int l2, double xi);

}  // namespace nsprobe
