#pragma once
// Per-site sliding-window statistics: total count, per-item counts, rank
// queries and churn (arrivals plus expiries inside the window).
//
// Two backends sit behind one interface. The exact backend keeps the window
// multiset indexed by timestamp and expires eagerly; it is the default and
// doubles as a test oracle. The exp-histogram backend answers the total
// count from an ExpHistogram (relative error lambda/6) while per-item counts
// and ranks stay exact.
//
// The estimator has a clock. Inserting an element moves the clock to its
// arrival tick; queries taking `now` first advance the clock to `now`.
// Clocks never move backwards.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exp_histogram.hpp"
#include "types.hpp"

namespace slidemon {

enum class Backend { exact, exp_histogram };

inline std::string to_string(Backend b) {
    return b == Backend::exact ? "exact" : "eh";
}

inline Backend parse_backend(const std::string& s) {
    if (s == "exact") return Backend::exact;
    if (s == "eh" || s == "exp-histogram" || s == "exp_histogram") return Backend::exp_histogram;
    throw InputError("unknown backend '" + s + "'");
}

class WindowEstimator {
public:
    WindowEstimator(WindowConfig cfg, double lambda, Backend backend = Backend::exact)
        : cfg_(cfg), lambda_(lambda), backend_(backend) {
        cfg_.validate();
        if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0,1)");
        if (backend_ == Backend::exp_histogram) eh_.emplace(cfg_, lambda_);
    }

    void insert(const TimedItem& it) {
        check_tardiness(it, cfg_);
        if (it.arrival < now_)
            throw InputError("arrival regression: " + std::to_string(it.arrival) + " < " +
                             std::to_string(now_));
        advance(it.arrival);
        by_timestamp_[it.timestamp].push_back(it.item);
        ++counts_[it.item];
        ++total_;
        ++live_stamps_[it.timestamp];
        ++arrivals_[it.arrival];
        ++arrivals_in_window_;
        if (eh_) eh_->add(it.timestamp, it.arrival);
    }

    /// Moves the clock forward and applies every expiry up to `now`.
    void advance(Tick now) {
        if (now < now_)
            throw InputError("clock moved backwards: " + std::to_string(now) + " < " +
                             std::to_string(now_));
        if (now == now_) return;
        now_ = now;
        const Tick start = cfg_.start(now);
        while (!by_timestamp_.empty() && by_timestamp_.begin()->first < start) {
            for (ItemId j : by_timestamp_.begin()->second) {
                auto c = counts_.find(j);
                if (--c->second == 0) counts_.erase(c);
                --total_;
            }
            by_timestamp_.erase(by_timestamp_.begin());
        }
        update_churn(start);
        if (eh_) eh_->advance(now);
    }

    Count estimate_total(Tick now) { advance(now); return total(); }
    Count estimate_item(ItemId j, Tick now) { advance(now); return count(j); }
    ItemId rank_quantile(double phi, Tick now) { advance(now); return quantile(phi); }
    Count churn_count(Tick now) { advance(now); return churn(); }

    /// Total count at the current tick (approximate under the EH backend).
    Count total() const { return eh_ ? eh_->estimate() : total_; }

    /// Exact in-window total, regardless of backend.
    Count exact_total() const { return total_; }

    Count count(ItemId j) const {
        auto it = counts_.find(j);
        return it == counts_.end() ? 0 : it->second;
    }

    /// Item holding rank ceil(phi * c) among the window multiset sorted by id.
    ItemId quantile(double phi) const {
        const double grid[1] = {phi};
        return quantiles(grid).front();
    }

    /// One pass over the window for ascending fractions in (0,1].
    std::vector<ItemId> quantiles(std::span<const double> phis) const {
        if (total_ == 0) throw InputError("rank query on an empty window");
        std::vector<ItemId> out;
        out.reserve(phis.size());
        auto it = counts_.begin();
        Count seen = it->second;
        double prev = 0.0;
        for (double phi : phis) {
            if (!(phi > 0.0 && phi <= 1.0 + detail::kCompareSlack))
                throw InputError("quantile fraction must lie in (0,1]");
            if (phi < prev) throw InputError("quantile fractions must be ascending");
            prev = phi;
            const Count rank = std::clamp<Count>(detail::ceil_count(phi * static_cast<double>(total_)),
                                                 1, total_);
            while (seen < rank) {
                ++it;
                seen += it->second;
            }
            out.push_back(it->first);
        }
        return out;
    }

    /// Elements that arrived or expired during [now - W + 1, now].
    Count churn() const { return arrivals_in_window_ + expired_in_window_; }

    /// In-window per-item counts at the current tick, ascending by id.
    const std::map<ItemId, Count>& counts() const { return counts_; }

    std::size_t distinct_items() const { return counts_.size(); }
    std::size_t bucket_count() const { return eh_ ? eh_->bucket_count() : 0; }
    const WindowConfig& config() const { return cfg_; }
    Backend backend() const { return backend_; }
    double lambda() const { return lambda_; }
    Tick now() const { return now_; }

private:
    void update_churn(Tick start) {
        while (!arrivals_.empty() && arrivals_.begin()->first < start) {
            arrivals_in_window_ -= arrivals_.begin()->second;
            arrivals_.erase(arrivals_.begin());
        }
        // an element with timestamp s expires at tick s + W
        const Tick expired_upto = now_ - cfg_.length;
        while (!live_stamps_.empty() && live_stamps_.begin()->first <= expired_upto) {
            expired_stamps_.insert(*live_stamps_.begin());
            expired_in_window_ += live_stamps_.begin()->second;
            live_stamps_.erase(live_stamps_.begin());
        }
        while (!expired_stamps_.empty() &&
               expired_stamps_.begin()->first + cfg_.length < start) {
            expired_in_window_ -= expired_stamps_.begin()->second;
            expired_stamps_.erase(expired_stamps_.begin());
        }
    }

    WindowConfig cfg_;
    double lambda_;
    Backend backend_;
    Tick now_ = std::numeric_limits<Tick>::min();

    std::map<Tick, std::vector<ItemId>> by_timestamp_;
    std::map<ItemId, Count> counts_;
    Count total_ = 0;
    std::optional<ExpHistogram> eh_;

    std::map<Tick, Count> arrivals_;
    Count arrivals_in_window_ = 0;
    std::map<Tick, Count> live_stamps_;
    std::map<Tick, Count> expired_stamps_;
    Count expired_in_window_ = 0;
};

}  // namespace slidemon
