#pragma once

#include <atomic>
#include <cstdint>
#include <unordered_map>

#include "nsprobe/fnspec.hpp"
#include "nsprobe/hypercube.hpp"

namespace nsprobe {

/// Query-counted oracle access to a FunctionSpec.
///
/// With memoization off (the default, matching the most conservative query
/// model) every evaluate() call costs one query; the counter is atomic, so a
/// session may be shared across worker threads. With memoization on only
/// distinct points are counted, and the session must then be used from a
/// single thread (the memo table is unsynchronized).
class OracleSession {
  public:
    explicit OracleSession(SpecPtr spec, bool memoize = false);

    /// Evaluate f(x), charging queries per the memoization rule.
    bool evaluate(const Point& x);

    std::uint64_t query_count() const { return count_.load(std::memory_order_relaxed); }
    void reset_count() { count_.store(0, std::memory_order_relaxed); }

    const FunctionSpec& spec() const { return *spec_; }
    SpecPtr spec_ptr() const { return spec_; }
    int n() const { return spec_->n; }
    bool memoized() const { return memo_; }

  private:
    struct PointKey {
        std::vector<std::uint64_t> words;
        bool operator==(const PointKey& other) const { return words == other.words; }
    };
    struct PointKeyHash {
        std::size_t operator()(const PointKey& k) const {
            std::uint64_t h = 0x9e3779b97f4a7c15ull;
            for (std::uint64_t w : k.words) {
                h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
                h *= 0xff51afd7ed558ccdull;
            }
            return static_cast<std::size_t>(h);
        }
    };

    SpecPtr spec_;
    std::atomic<std::uint64_t> count_{0};
    bool memo_;
    std::unordered_map<PointKey, bool, PointKeyHash> memo_map_;
};

}  // namespace nsprobe
