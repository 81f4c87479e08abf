#pragma once
// Brute-force ground truth for audits. Works from the raw element lists only
// and recounts every window from scratch; it shares no code path with the
// estimators or the protocols.

#include <algorithm>
#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

#include "types.hpp"

namespace slidemon {

/// Exact contents of the union of all stream windows at one tick.
class WindowSnapshot {
public:
    WindowSnapshot() = default;

    explicit WindowSnapshot(const std::vector<ItemId>& items, std::vector<Count> per_stream)
        : per_stream_(std::move(per_stream)) {
        std::unordered_map<ItemId, Count> tally;
        for (ItemId j : items) ++tally[j];
        total_ = static_cast<Count>(items.size());
        counts_.assign(tally.begin(), tally.end());
        std::sort(counts_.begin(), counts_.end());
        below_.reserve(counts_.size() + 1);
        below_.push_back(0);
        for (const auto& [j, c] : counts_) below_.push_back(below_.back() + c);
    }

    Count total() const { return total_; }
    Count stream_total(std::size_t s) const { return per_stream_.at(s); }

    Count count(ItemId j) const {
        auto it = find(j);
        return it != counts_.end() && it->first == j ? it->second : 0;
    }

    /// Number of window elements strictly smaller than j.
    Count count_below(ItemId j) const {
        return below_[static_cast<std::size_t>(find(j) - counts_.begin())];
    }

    /// 1-based rank range occupied by j. An absent j occupies the single
    /// position between its neighbours, reported as count_below(j).
    std::pair<Count, Count> rank_range(ItemId j) const {
        const Count lo = count_below(j);
        const Count c = count(j);
        return c == 0 ? std::pair{lo, lo} : std::pair{lo + 1, lo + c};
    }

    /// Item at 1-based rank r.
    ItemId at_rank(Count r) const {
        if (r < 1 || r > total_) throw InputError("rank out of range");
        auto it = std::lower_bound(below_.begin() + 1, below_.end(), r);
        return counts_[static_cast<std::size_t>(it - below_.begin() - 1)].first;
    }

    /// Items with count >= threshold.
    std::vector<ItemId> items_at_least(double threshold) const {
        std::vector<ItemId> out;
        for (const auto& [j, c] : counts_)
            if (static_cast<double>(c) >= threshold) out.push_back(j);
        return out;
    }

    const std::vector<std::pair<ItemId, Count>>& counts() const { return counts_; }

private:
    std::vector<std::pair<ItemId, Count>>::const_iterator find(ItemId j) const {
        return std::lower_bound(counts_.begin(), counts_.end(), j,
                                [](const auto& e, ItemId v) { return e.first < v; });
    }

    Count total_ = 0;
    std::vector<Count> per_stream_;
    std::vector<std::pair<ItemId, Count>> counts_;
    std::vector<Count> below_;
};

class Oracle {
public:
    Oracle(std::vector<std::vector<TimedItem>> streams, WindowConfig cfg)
        : streams_(std::move(streams)), cfg_(cfg) {
        for (auto& s : streams_)
            std::sort(s.begin(), s.end(), [](const TimedItem& a, const TimedItem& b) {
                return a.timestamp < b.timestamp;
            });
    }

    /// Elements with timestamp in [now-W+1, now] that have arrived by `now`.
    WindowSnapshot window(Tick now) const {
        std::vector<ItemId> items;
        std::vector<Count> per_stream;
        const Tick start = cfg_.start(now);
        for (const auto& s : streams_) {
            auto lo = std::lower_bound(s.begin(), s.end(), start,
                                       [](const TimedItem& e, Tick t) { return e.timestamp < t; });
            Count n = 0;
            for (auto it = lo; it != s.end() && it->timestamp <= now; ++it) {
                if (it->arrival > now) continue;
                items.push_back(it->item);
                ++n;
            }
            per_stream.push_back(n);
        }
        return WindowSnapshot(items, std::move(per_stream));
    }

    std::size_t streams() const { return streams_.size(); }
    const WindowConfig& config() const { return cfg_; }

private:
    std::vector<std::vector<TimedItem>> streams_;
    WindowConfig cfg_;
};

}  // namespace slidemon
