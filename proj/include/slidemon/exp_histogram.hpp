#pragma once
// Exponential histogram over a time-based sliding window.
//
// Counts the elements whose timestamps fall in the last W ticks using
// O((1/lambda) * log(lambda * n)) buckets. Buckets hold 2^i elements and
// remember the newest timestamp they cover. Each size class keeps at most
// ceil(6/lambda) + 1 buckets; on overflow the two oldest of the class merge
// into one bucket of the next class. Only the oldest bucket straddles the
// window boundary, so reporting half of it bounds the relative error by
// lambda/12.
//
// Elements may arrive out of timestamp order by up to `tardiness` ticks. They
// are counted exactly in a pending buffer until no earlier timestamp can
// still arrive, then folded into the buckets in timestamp order.

#include <cstddef>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "types.hpp"

namespace slidemon {

class ExpHistogram {
public:
    ExpHistogram(WindowConfig cfg, double lambda) : cfg_(cfg), lambda_(lambda) {
        cfg_.validate();
        if (!(lambda > 0.0 && lambda < 1.0))
            throw InputError("exp-histogram lambda must lie in (0,1)");
        per_class_ = static_cast<std::size_t>(std::ceil(6.0 / lambda)) + 1;
    }

    /// Records one element with the given timestamp, arriving at `arrival`.
    void add(Tick timestamp, Tick arrival) {
        advance(arrival);
        if (timestamp < folded_through_ + 1)
            throw InputError("exp-histogram: timestamp " + std::to_string(timestamp) +
                             " is older than the tardiness horizon");
        ++pending_[timestamp];
        ++pending_total_;
    }

    /// Moves the clock to `now`, folding final timestamps and expiring old buckets.
    void advance(Tick now) {
        if (now < now_) throw InputError("exp-histogram: clock moved backwards");
        now_ = now;
        // elements arriving at `now` or later have timestamps >= now - tardiness
        const Tick final_through = now - cfg_.tardiness - 1;
        while (!pending_.empty() && pending_.begin()->first <= final_through) {
            auto [ts, n] = *pending_.begin();
            pending_.erase(pending_.begin());
            pending_total_ -= n;
            for (Count i = 0; i < n; ++i) push_unit(ts);
        }
        if (final_through > folded_through_) folded_through_ = final_through;
        expire();
    }

    /// Estimated number of in-window elements at the current tick.
    Count estimate() const {
        if (bucketed_total_ == 0) return pending_total_;
        const Count oldest = Count{1} << top_level();
        return bucketed_total_ - oldest + (oldest + 1) / 2 + pending_total_;
    }

    std::size_t bucket_count() const {
        std::size_t n = 0;
        for (const auto& level : levels_) n += level.size();
        return n;
    }

    std::size_t pending_slots() const { return pending_.size(); }
    std::size_t max_per_class() const { return per_class_; }
    double lambda() const { return lambda_; }
    Tick now() const { return now_; }

private:
    void push_unit(Tick ts) {
        if (levels_.empty()) levels_.emplace_back();
        levels_[0].push_back(ts);
        ++bucketed_total_;
        for (std::size_t i = 0; i < levels_.size() && levels_[i].size() > per_class_; ++i) {
            levels_[i].pop_front();
            const Tick newer = levels_[i].front();
            levels_[i].pop_front();
            if (i + 1 == levels_.size()) levels_.emplace_back();
            // every bucket of class i+1 is older than any bucket of class i
            levels_[i + 1].push_back(newer);
        }
    }

    void expire() {
        const Tick start = cfg_.start(now_);
        while (bucketed_total_ > 0) {
            const std::size_t top = top_level();
            if (levels_[top].front() >= start) break;
            levels_[top].pop_front();
            bucketed_total_ -= Count{1} << top;
        }
        while (!levels_.empty() && levels_.back().empty()) levels_.pop_back();
    }

    std::size_t top_level() const {
        std::size_t i = levels_.size();
        while (i > 0 && levels_[i - 1].empty()) --i;
        return i - 1;
    }

    WindowConfig cfg_;
    double lambda_;
    std::size_t per_class_ = 0;
    // levels_[i] holds the newest timestamps of buckets of size 2^i, oldest first
    std::vector<std::deque<Tick>> levels_;
    Count bucketed_total_ = 0;
    std::map<Tick, Count> pending_;
    Count pending_total_ = 0;
    Tick now_ = std::numeric_limits<Tick>::min();
    Tick folded_through_ = std::numeric_limits<Tick>::min() / 2;
};

}  // namespace slidemon
