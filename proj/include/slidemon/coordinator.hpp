#pragma once
// Root-side state: the last value received for every slot, and the four
// query types answered from those values alone.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "protocol.hpp"
#include "types.hpp"

namespace slidemon {

struct RootParams {
    // error target of the frequent-items composite (BC eps/24 + AC 11eps/24)
    double epsilon = 0.1;
    // error target of the quantile protocol; its lambda (eps/20) fixes the grid
    double quantile_epsilon = 0.1;
};

struct FrequentResult {
    std::vector<ItemId> items;
    // phi <= eps/2: the threshold is non-positive and every tracked item qualifies
    bool degenerate = false;

    friend bool operator==(const FrequentResult&, const FrequentResult&) = default;
};

class RootState {
public:
    RootState(std::size_t streams, RootParams params = {})
        : params_(params), totals_(streams, 0), items_(streams), grids_(streams) {
        if (streams == 0) throw InputError("coordinator needs at least one stream");
    }

    void ingest(const Message& m) {
        if (m.stream >= totals_.size())
            throw InputError("message from unknown stream " + std::to_string(m.stream));
        if (m.is_total()) {
            total_sum_ += m.value - totals_[m.stream];
            totals_[m.stream] = m.value;
        } else if (m.is_item()) {
            auto& slot = items_[m.stream];
            auto it = slot.find(m.item);
            const Count prev = it == slot.end() ? 0 : it->second;
            // zero entries are pruned; absent and 0 are the same to every query
            if (m.value == 0) {
                if (it != slot.end()) slot.erase(it);
            } else if (it == slot.end()) {
                slot.emplace(m.item, m.value);
            } else {
                it->second = m.value;
            }
            adjust_item_sum(m.item, m.value - prev);
        } else {
            grids_[m.stream] = m.grid;
        }
    }

    std::size_t streams() const { return totals_.size(); }
    const RootParams& params() const { return params_; }

    /// Sum of the last totals of every stream.
    Count query_total() const { return total_sum_; }

    Count stream_total(StreamId s) const { return totals_.at(s); }

    /// Sum over streams of the last value received for item j.
    Count query_item(ItemId j) const {
        auto it = item_sums_.find(j);
        return it == item_sums_.end() ? 0 : it->second;
    }

    Count stream_item(StreamId s, ItemId j) const {
        const auto& slot = items_.at(s);
        auto it = slot.find(j);
        return it == slot.end() ? 0 : it->second;
    }

    /// Items whose summed estimate reaches (phi - eps/2) of the summed totals.
    FrequentResult query_frequent(double phi) const {
        if (!(phi > 0.0 && phi <= 1.0)) throw InputError("frequency threshold must lie in (0,1]");
        FrequentResult res;
        const double cut = (phi - params_.epsilon / 2.0) * static_cast<double>(total_sum_);
        res.degenerate = phi <= params_.epsilon / 2.0;
        for (const auto& [j, v] : item_sums_) {
            if (static_cast<double>(v) >= cut - detail::slack(cut)) res.items.push_back(j);
        }
        std::sort(res.items.begin(), res.items.end());
        return res;
    }

    /// Weighted merge of every stream's last grid: grid point k of stream s
    /// weighs (phi_k - phi_{k-1}) * r_s, i.e. 5*lambda*r_s for regular steps.
    /// Returns the smallest reported value whose cumulative weight reaches
    /// ceil(phi * sum r_s).
    ItemId query_quantile(double phi) const {
        if (!(phi > 0.0 && phi <= 1.0)) throw InputError("quantile fraction must lie in (0,1]");
        const auto entries = weighted_entries();
        if (entries.empty()) throw InputError("no quantile grid received");
        const double target = static_cast<double>(
            detail::ceil_count(phi * static_cast<double>(total_sum_)));
        double acc = 0.0;
        for (const auto& [value, weight] : entries) {
            acc += weight;
            if (acc >= target - detail::slack(target)) return value;
        }
        return entries.back().first;
    }

    /// Items answering at least phi'/eps - 2 consecutive quantile queries at
    /// phi = eps, 2eps, ..., 1, where eps is the quantile protocol's target.
    std::vector<ItemId> frequent_from_quantiles(double phi_prime) const {
        const double eps = params_.quantile_epsilon;
        const double need = phi_prime / eps - 2.0;
        if (!(need > detail::kCompareSlack))
            throw InputError("phi' must exceed 2*eps for the quantile reduction");
        const auto steps = static_cast<std::size_t>(std::ceil(1.0 / eps - detail::kCompareSlack));
        std::vector<ItemId> answers;
        answers.reserve(steps);
        for (std::size_t i = 1; i <= steps; ++i)
            answers.push_back(query_quantile(std::min(1.0, static_cast<double>(i) * eps)));
        std::set<ItemId> out;
        std::size_t run = 0;
        for (std::size_t i = 0; i < answers.size(); ++i) {
            run = (i > 0 && answers[i] == answers[i - 1]) ? run + 1 : 1;
            if (static_cast<double>(run) >= need - detail::slack(need)) out.insert(answers[i]);
        }
        return {out.begin(), out.end()};
    }

    const std::vector<ItemId>& grid(StreamId s) const { return grids_.at(s); }
    bool has_grid() const {
        return std::any_of(grids_.begin(), grids_.end(), [](const auto& g) { return !g.empty(); });
    }

    std::size_t tracked_items() const { return item_sums_.size(); }

    /// Nonzero summed item estimates, unordered.
    const std::unordered_map<ItemId, Count>& item_estimates() const { return item_sums_; }

private:
    void adjust_item_sum(ItemId j, Count delta) {
        if (delta == 0) return;
        auto [it, fresh] = item_sums_.try_emplace(j, 0);
        it->second += delta;
        if (it->second == 0) item_sums_.erase(it);
    }

    std::vector<std::pair<ItemId, double>> weighted_entries() const {
        const std::vector<double> fractions = quantile_grid(ProtocolParams::quantiles(params_.quantile_epsilon).lambda);
        std::vector<std::pair<ItemId, double>> entries;
        for (std::size_t s = 0; s < grids_.size(); ++s) {
            const auto& g = grids_[s];
            if (g.empty() || totals_[s] == 0) continue;
            if (g.size() != fractions.size())
                throw InputError("grid from stream " + std::to_string(s) + " has " +
                                 std::to_string(g.size()) + " points, expected " +
                                 std::to_string(fractions.size()));
            double prev = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                entries.emplace_back(g[k], (fractions[k] - prev) * static_cast<double>(totals_[s]));
                prev = fractions[k];
            }
        }
        std::stable_sort(entries.begin(), entries.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        return entries;
    }

    RootParams params_;
    std::vector<Count> totals_;
    Count total_sum_ = 0;
    std::vector<std::unordered_map<ItemId, Count>> items_;
    std::unordered_map<ItemId, Count> item_sums_;
    std::vector<std::vector<ItemId>> grids_;
};

}  // namespace slidemon
