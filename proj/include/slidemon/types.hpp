#pragma once
// Core vocabulary shared by every slidemon component: ticks, item ids,
// timestamped stream elements and the sliding-window configuration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace slidemon {

using Tick = std::int64_t;
using ItemId = std::uint64_t;
using Count = std::int64_t;
using StreamId = std::uint32_t;

/// One stream element: the item, the tick it was created at and the tick it
/// reached its site. `arrival - timestamp` is the element's tardiness.
struct TimedItem {
    ItemId item = 0;
    Tick timestamp = 0;
    Tick arrival = 0;

    friend bool operator==(const TimedItem&, const TimedItem&) = default;
};

/// Raised for malformed input or violated preconditions on user-supplied data.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time-based sliding window of `length` ticks. At tick t the window holds
/// every element whose timestamp lies in [t - length + 1, t]. Elements may
/// arrive up to `tardiness` ticks after their timestamp.
struct WindowConfig {
    Tick length = 1;
    Tick tardiness = 0;

    WindowConfig() = default;
    WindowConfig(Tick w, Tick tau) : length(w), tardiness(tau) { validate(); }

    void validate() const {
        if (length <= 0)
            throw InputError("window length must be positive, got " + std::to_string(length));
        if (tardiness < 0 || tardiness > length - 1)
            throw InputError("tardiness must lie in [0, W-1], got " + std::to_string(tardiness));
    }

    Tick start(Tick now) const { return now - length + 1; }
    bool contains(Tick now, Tick timestamp) const {
        return timestamp >= start(now) && timestamp <= now;
    }
};

/// Checks the per-element invariants against a window configuration.
inline void check_tardiness(const TimedItem& it, const WindowConfig& cfg) {
    if (it.timestamp < 0)
        throw InputError("negative timestamp " + std::to_string(it.timestamp));
    if (it.arrival < it.timestamp)
        throw InputError("arrival " + std::to_string(it.arrival) + " precedes timestamp " +
                         std::to_string(it.timestamp));
    if (it.arrival - it.timestamp > cfg.tardiness)
        throw InputError("tardiness violation: arrival " + std::to_string(it.arrival) +
                         " exceeds timestamp " + std::to_string(it.timestamp) + " by more than " +
                         std::to_string(cfg.tardiness));
}

namespace detail {

// Comparisons on thresholds built from decimal parameters (9 * 0.1 * 100 is
// not exactly 90 in binary). Values closer than the slack count as equal so
// strict inequalities behave as they would in exact arithmetic.
inline constexpr double kCompareSlack = 1e-9;

inline double slack(double b) { return kCompareSlack * std::max(1.0, std::abs(b)); }

inline bool strictly_greater(double a, double b) { return a > b + slack(b); }
inline bool strictly_less(double a, double b) { return a < b - slack(b); }

// ceil(x) treating values within the slack of an integer as that integer.
inline Count ceil_count(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= slack(r)) return static_cast<Count>(r);
    return static_cast<Count>(std::ceil(x));
}

}  // namespace detail

}  // namespace slidemon
