#pragma once
// Site-side communication protocols.
//
// Each site watches its own WindowEstimator and, once per tick, decides which
// estimates to push to the coordinator:
//
//   simple_on_advance    per-item Up/Down events on a +-9*lambda*c band
//   ac_on_advance        Simple plus Off events and the off-flag guard
//   bc_on_advance        total-count TotalUp/TotalDown on a multiplicative band
//   quantile_on_advance  full quantile grid whenever a grid point crosses
//                        a neighbour of the last reported grid
//
// All protocols are one-way: nothing flows back from the coordinator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "types.hpp"
#include "window_estimator.hpp"

namespace slidemon {

enum class MessageKind { up, down, off, total_up, total_down, quantile_grid };

inline std::string to_string(MessageKind k) {
    switch (k) {
        case MessageKind::up: return "Up";
        case MessageKind::down: return "Down";
        case MessageKind::off: return "Off";
        case MessageKind::total_up: return "TotalUp";
        case MessageKind::total_down: return "TotalDown";
        case MessageKind::quantile_grid: return "QuantileGrid";
    }
    return "?";
}

inline MessageKind parse_message_kind(const std::string& s) {
    if (s == "Up") return MessageKind::up;
    if (s == "Down") return MessageKind::down;
    if (s == "Off") return MessageKind::off;
    if (s == "TotalUp") return MessageKind::total_up;
    if (s == "TotalDown") return MessageKind::total_down;
    if (s == "QuantileGrid") return MessageKind::quantile_grid;
    throw InputError("unknown message kind '" + s + "'");
}

/// One site-to-root update. Item messages cost two words (id and value),
/// totals one word, grids one word per grid point. The stream id travels with
/// the channel and is not charged.
struct Message {
    StreamId stream = 0;
    MessageKind kind = MessageKind::up;
    ItemId item = 0;
    Count value = 0;
    std::vector<ItemId> grid;

    bool is_item() const {
        return kind == MessageKind::up || kind == MessageKind::down || kind == MessageKind::off;
    }
    bool is_total() const {
        return kind == MessageKind::total_up || kind == MessageKind::total_down;
    }

    Count words() const {
        if (is_item()) return 2;
        if (is_total()) return 1;
        return static_cast<Count>(grid.size());
    }

    static Message item_update(StreamId s, MessageKind k, ItemId j, Count v) {
        return Message{s, k, j, v, {}};
    }
    static Message total_update(StreamId s, MessageKind k, Count v) {
        return Message{s, k, 0, v, {}};
    }
    static Message quantile_grid(StreamId s, std::vector<ItemId> g) {
        return Message{s, MessageKind::quantile_grid, 0, 0, std::move(g)};
    }

    friend bool operator==(const Message&, const Message&) = default;
};

/// Grid fractions 5*lambda, 10*lambda, ..., with 1 appended when the step
/// does not divide 1. The last fraction is always exactly 1.
inline std::vector<double> quantile_grid(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("grid lambda must lie in (0,1)");
    const double step = 5.0 * lambda;
    const auto whole = static_cast<std::size_t>(std::floor(1.0 / step + detail::kCompareSlack));
    std::vector<double> grid;
    grid.reserve(whole + 1);
    for (std::size_t k = 1; k <= whole; ++k) grid.push_back(static_cast<double>(k) * step);
    if (!grid.empty() && std::abs(grid.back() - 1.0) <= detail::kCompareSlack)
        grid.back() = 1.0;
    else
        grid.push_back(1.0);
    return grid;
}

struct ProtocolParams {
    double epsilon = 0.1;
    // local estimator error
    double lambda = 0.1 / 11.0;
    // BC send band around the last reported total
    double theta = 0.0;
    int word_size_bits = 64;

    /// AC and Simple: lambda = eps/11.
    static ProtocolParams approximate_counting(double eps) {
        check_epsilon(eps);
        return {eps, eps / 11.0, 0.0, 64};
    }

    /// BC: band theta = eps/2 over an estimator with lambda = eps, so that
    /// (1 + eps/2)(1 + eps/6) <= 1 + eps and (1 - eps/2)(1 - eps/6) >= 1 - eps.
    static ProtocolParams basic_counting(double eps) {
        check_epsilon(eps);
        return {eps, eps, eps / 2.0, 64};
    }

    /// Quantile grid protocol: lambda = eps/20, grid step 5*lambda.
    static ProtocolParams quantiles(double eps) {
        check_epsilon(eps);
        return {eps, eps / 20.0, 0.0, 64};
    }

    static void check_epsilon(double eps) {
        if (!(eps > 0.0 && eps < 1.0))
            throw InputError("epsilon must lie in (0,1), got " + std::to_string(eps));
    }
};

struct SentValue {
    Count value = 0;
    Tick at = 0;
};

/// Protocol memory of one stream. An item absent from `last_sent` was never
/// reported (or was last reported as 0); an item absent from `live` has
/// off_j = true.
struct SiteState {
    StreamId stream = 0;
    ProtocolParams params;
    std::map<ItemId, SentValue> last_sent;
    std::set<ItemId> live;
    std::optional<SentValue> last_total;
    std::vector<double> grid_fractions;
    std::vector<ItemId> last_grid;

    SiteState(StreamId s, ProtocolParams p) : stream(s), params(p) {}

    bool off(ItemId j) const { return !live.contains(j); }

    Count last_value(ItemId j) const {
        auto it = last_sent.find(j);
        return it == last_sent.end() ? 0 : it->second.value;
    }

    std::size_t live_count() const { return live.size(); }
};

namespace detail {

inline void require_current(const WindowEstimator& est, Tick now) {
    if (est.now() != now)
        throw std::logic_error("estimator is at tick " + std::to_string(est.now()) +
                               ", protocol evaluated at " + std::to_string(now));
}

inline ItemId key_of(ItemId j) { return j; }
template <typename V>
ItemId key_of(const std::pair<const ItemId, V>& kv) { return kv.first; }

// Visits, in ascending id order, every id in the window or in `extra`, with
// its current in-window count.
template <typename Extra, typename Fn>
void for_each_candidate(const WindowEstimator& est, const Extra& extra, Fn&& fn) {
    const auto& counts = est.counts();
    auto a = counts.begin();
    auto b = extra.begin();
    while (a != counts.end() || b != extra.end()) {
        if (b == extra.end() || (a != counts.end() && a->first < key_of(*b))) {
            fn(a->first, a->second);
            ++a;
        } else if (a == counts.end() || key_of(*b) < a->first) {
            fn(key_of(*b), Count{0});
            ++b;
        } else {
            fn(a->first, a->second);
            ++a;
            ++b;
        }
    }
}

}  // namespace detail

inline std::vector<Message> simple_on_advance(SiteState& s, const WindowEstimator& est, Tick now) {
    detail::require_current(est, now);
    const double band = 9.0 * s.params.lambda * static_cast<double>(est.total());
    std::vector<Message> out;
    std::vector<std::pair<ItemId, Count>> changed;
    detail::for_each_candidate(est, s.last_sent, [&](ItemId j, Count c) {
        const auto prev = static_cast<double>(s.last_value(j));
        if (detail::strictly_greater(static_cast<double>(c), prev + band)) {
            out.push_back(Message::item_update(s.stream, MessageKind::up, j, c));
            changed.emplace_back(j, c);
        } else if (detail::strictly_less(static_cast<double>(c), prev - band)) {
            out.push_back(Message::item_update(s.stream, MessageKind::down, j, c));
            changed.emplace_back(j, c);
        }
    });
    for (auto [j, c] : changed) {
        if (c == 0)
            s.last_sent.erase(j);
        else
            s.last_sent[j] = SentValue{c, now};
    }
    return out;
}

inline std::vector<Message> ac_on_advance(SiteState& s, const WindowEstimator& est, Tick now) {
    detail::require_current(est, now);
    const auto total = static_cast<double>(est.total());
    const double band = 9.0 * s.params.lambda * total;
    const double floor = 3.0 * s.params.lambda * total;
    std::vector<Message> out;
    // live items always have a last_sent entry, so last_sent covers them
    detail::for_each_candidate(est, s.last_sent, [&](ItemId j, Count c) {
        const auto cj = static_cast<double>(c);
        const auto prev = static_cast<double>(s.last_value(j));
        const bool is_off = s.off(j);
        if (detail::strictly_greater(cj, prev + band)) {
            out.push_back(Message::item_update(s.stream, MessageKind::up, j, c));
        } else if (!is_off && detail::strictly_less(cj, floor)) {
            out.push_back(Message::item_update(s.stream, MessageKind::off, j, 0));
        } else if (!is_off && detail::strictly_less(cj, prev - band)) {
            out.push_back(Message::item_update(s.stream, MessageKind::down, j, c));
        }
    });
    for (const Message& m : out) {
        if (m.kind == MessageKind::off) {
            s.last_sent.erase(m.item);
            s.live.erase(m.item);
        } else {
            s.last_sent[m.item] = SentValue{m.value, now};
            if (m.kind == MessageKind::up) s.live.insert(m.item);
        }
    }
    return out;
}

inline std::vector<Message> bc_on_advance(SiteState& s, const WindowEstimator& est, Tick now) {
    detail::require_current(est, now);
    const Count c = est.total();
    std::vector<Message> out;
    if (!s.last_total) {
        if (c > 0) out.push_back(Message::total_update(s.stream, MessageKind::total_up, c));
    } else {
        const auto v = static_cast<double>(s.last_total->value);
        const auto cur = static_cast<double>(c);
        if (detail::strictly_greater(cur, (1.0 + s.params.theta) * v))
            out.push_back(Message::total_update(s.stream, MessageKind::total_up, c));
        else if (detail::strictly_less(cur, (1.0 - s.params.theta) * v))
            out.push_back(Message::total_update(s.stream, MessageKind::total_down, c));
    }
    if (!out.empty()) s.last_total = SentValue{c, now};
    return out;
}

inline std::vector<Message> quantile_on_advance(SiteState& s, const WindowEstimator& est, Tick now) {
    detail::require_current(est, now);
    if (est.counts().empty()) return {};
    if (s.grid_fractions.empty()) s.grid_fractions = quantile_grid(s.params.lambda);
    std::vector<ItemId> current = est.quantiles(s.grid_fractions);
    bool resend = s.last_grid.size() != current.size();
    for (std::size_t k = 0; !resend && k < current.size(); ++k) {
        if (k + 1 < current.size() && current[k] > s.last_grid[k + 1]) resend = true;
        if (k > 0 && current[k] < s.last_grid[k - 1]) resend = true;
    }
    if (!resend) return {};
    s.last_grid = current;
    std::vector<Message> out;
    out.push_back(Message::quantile_grid(s.stream, std::move(current)));
    return out;
}

}  // namespace slidemon
