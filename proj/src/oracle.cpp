#include "nsprobe/oracle.hpp"

#include <stdexcept>

#include "nsprobe/errors.hpp"

namespace nsprobe {

OracleSession::OracleSession(SpecPtr spec, bool memoize) : spec_(std::move(spec)), memo_(memoize) {
    if (!spec_)
        throw std::invalid_argument("OracleSession: null spec");
}

bool OracleSession::evaluate(const Point& x) {
    if (x.n() != spec_->n)
        throw DimensionError("OracleSession::evaluate: point dimension mismatch");
    if (memo_) {
        PointKey key{{x.words().begin(), x.words().end()}};
        auto it = memo_map_.find(key);
        if (it != memo_map_.end())
            return it->second;
        bool v = eval_spec(*spec_, x);
        count_.fetch_add(1, std::memory_order_relaxed);
        memo_map_.emplace(std::move(key), v);
        return v;
    }
    count_.fetch_add(1, std::memory_order_relaxed);
    return eval_spec(*spec_, x);
}

}  // namespace nsprobe
