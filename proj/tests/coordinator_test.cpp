#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "slidemon/coordinator.hpp"

using namespace slidemon;

namespace {

Message up(StreamId s, ItemId j, Count v) { return Message::item_update(s, MessageKind::up, j, v); }
Message total(StreamId s, Count v) { return Message::total_update(s, MessageKind::total_up, v); }

// Grid a site would report for a sorted window, computed by plain indexing.
std::vector<ItemId> grid_of(std::vector<ItemId> window, double quantile_eps) {
    std::sort(window.begin(), window.end());
    const double lambda = quantile_eps / 20.0;
    const double step = 5.0 * lambda;
    const auto c = static_cast<double>(window.size());
    std::vector<ItemId> g;
    for (int k = 1;; ++k) {
        double f = std::min(1.0, k * step);
        if (std::abs(f - 1.0) < 1e-9) f = 1.0;
        auto r = static_cast<std::size_t>(std::ceil(f * c - 1e-9));
        r = std::clamp<std::size_t>(r, 1, window.size());
        g.push_back(window[r - 1]);
        if (f == 1.0) break;
    }
    return g;
}

}  // namespace

TEST(RootState, IngestOverwritesSlots) {
    RootState root(2);
    root.ingest(up(0, 4, 91));
    EXPECT_EQ(root.query_item(4), 91);
    EXPECT_EQ(root.stream_item(0, 4), 91);
    root.ingest(Message::item_update(0, MessageKind::off, 4, 0));
    EXPECT_EQ(root.query_item(4), 0);
    EXPECT_EQ(root.tracked_items(), 0u);
    root.ingest(total(0, 111));
    EXPECT_EQ(root.query_total(), 111);
}

TEST(RootState, EmptyAnswers) {
    RootState root(3);
    EXPECT_EQ(root.query_total(), 0);
    EXPECT_EQ(root.query_item(12345), 0);
    EXPECT_FALSE(root.has_grid());
    EXPECT_THROW(root.query_quantile(0.5), InputError);
}

TEST(RootState, TotalsSumAcrossStreams) {
    RootState root(2);
    root.ingest(total(0, 100));
    root.ingest(total(1, 50));
    EXPECT_EQ(root.query_total(), 150);
    root.ingest(Message::total_update(0, MessageKind::total_down, 80));
    EXPECT_EQ(root.query_total(), 130);
}

TEST(RootState, ItemsSumAcrossStreams) {
    RootState root(3);
    root.ingest(up(0, 9, 10));
    root.ingest(up(2, 9, 5));
    root.ingest(Message::item_update(2, MessageKind::down, 9, 3));
    EXPECT_EQ(root.query_item(9), 13);
}

TEST(RootState, UnknownStreamRejected) {
    RootState root(2);
    EXPECT_THROW(root.ingest(total(2, 5)), InputError);
    EXPECT_THROW(RootState(0), InputError);
}

TEST(RootState, FrequentItemsThreshold) {
    RootState root(1, RootParams{0.1, 0.1});
    root.ingest(total(0, 100));
    root.ingest(up(0, 'a', 60));
    root.ingest(up(0, 'b', 30));
    root.ingest(up(0, 'c', 10));
    const auto res = root.query_frequent(0.5);
    EXPECT_EQ(res.items, std::vector<ItemId>{'a'});
    EXPECT_FALSE(res.degenerate);
    // cut is (0.35 - 0.05) * 100 = 30, inclusive
    EXPECT_EQ(root.query_frequent(0.35).items, (std::vector<ItemId>{'a', 'b'}));
    const auto all = root.query_frequent(0.05);
    EXPECT_TRUE(all.degenerate);
    EXPECT_EQ(all.items.size(), 3u);
    EXPECT_THROW(root.query_frequent(0.0), InputError);
}

TEST(RootState, SingleItemStreamIsFrequentAtOne) {
    RootState root(1, RootParams{0.1, 0.1});
    root.ingest(total(0, 40));
    root.ingest(up(0, 3, 40));
    EXPECT_EQ(root.query_frequent(1.0).items, std::vector<ItemId>{3});
}

TEST(RootState, QuantileAtOneIsLargestGridValue) {
    std::vector<ItemId> w;
    for (ItemId j = 1; j <= 100; ++j) w.push_back(j);
    RootState root(1, RootParams{0.1, 0.2});
    root.ingest(total(0, 100));
    root.ingest(Message::quantile_grid(0, grid_of(w, 0.2)));
    EXPECT_EQ(root.query_quantile(1.0), 100u);
}

TEST(RootState, QuantileMedianWithinRankBand) {
    const double eps = 0.2;
    std::vector<ItemId> w;
    for (ItemId j = 1; j <= 100; ++j) w.push_back(j);
    RootState root(1, RootParams{0.1, eps});
    root.ingest(total(0, 100));
    root.ingest(Message::quantile_grid(0, grid_of(w, eps)));
    const auto ans = static_cast<double>(root.query_quantile(0.5));
    // items 1..100: the rank of j is j
    EXPECT_LE(std::abs(ans - 50.0), eps * 100.0);
}

TEST(RootState, LargerStreamWeighsMore) {
    // stream 0 holds 100 copies of item 1, stream 1 holds 300 copies of item 2;
    // item 1 covers exactly the first quarter of the merged weight
    const double eps = 0.5;
    RootState root(2, RootParams{0.1, eps});
    root.ingest(total(0, 100));
    root.ingest(total(1, 300));
    root.ingest(Message::quantile_grid(0, grid_of(std::vector<ItemId>(100, 1), eps)));
    root.ingest(Message::quantile_grid(1, grid_of(std::vector<ItemId>(300, 2), eps)));
    EXPECT_EQ(root.query_quantile(0.25), 1u);
    EXPECT_EQ(root.query_quantile(0.26), 2u);
}

TEST(RootState, MergedQuantilesAgainstSortOracle) {
    const double eps = 0.1;
    std::vector<ItemId> a, b;
    for (ItemId j = 0; j < 100; ++j) a.push_back(3 * j);
    for (ItemId j = 0; j < 300; ++j) b.push_back(j);
    RootState root(2, RootParams{0.1, eps});
    root.ingest(total(0, 100));
    root.ingest(total(1, 300));
    root.ingest(Message::quantile_grid(0, grid_of(a, eps)));
    root.ingest(Message::quantile_grid(1, grid_of(b, eps)));
    std::vector<ItemId> merged = a;
    merged.insert(merged.end(), b.begin(), b.end());
    std::sort(merged.begin(), merged.end());
    const double c = static_cast<double>(merged.size());
    for (double phi = 0.05; phi <= 1.0 + 1e-9; phi += 0.05) {
        const ItemId ans = root.query_quantile(std::min(phi, 1.0));
        const auto lo = static_cast<double>(std::lower_bound(merged.begin(), merged.end(), ans) - merged.begin());
        const auto hi = static_cast<double>(std::upper_bound(merged.begin(), merged.end(), ans) - merged.begin());
        // some rank of ans, in [lo+1, hi], lies within eps*c of phi*c
        const double target = phi * c;
        const double gap = target < lo + 1 ? lo + 1 - target : (target > hi ? target - hi : 0.0);
        EXPECT_LE(gap, eps * c) << "phi=" << phi;
    }
}

TEST(RootState, MismatchedGridRejected) {
    RootState root(1, RootParams{0.1, 0.5});
    root.ingest(total(0, 10));
    root.ingest(Message::quantile_grid(0, {1, 2, 3}));
    EXPECT_THROW(root.query_quantile(0.5), InputError);
}

TEST(RootState, FrequentFromQuantilesFindsDominantItem) {
    const double eps = 0.1;
    std::vector<ItemId> w;
    for (ItemId j = 0; j < 5; ++j) w.push_back(j);
    for (int i = 0; i < 90; ++i) w.push_back(7);
    for (ItemId j = 10; j < 15; ++j) w.push_back(j);
    RootState root(1, RootParams{eps, eps});
    root.ingest(total(0, 100));
    root.ingest(Message::quantile_grid(0, grid_of(w, eps)));
    EXPECT_EQ(root.frequent_from_quantiles(0.5), std::vector<ItemId>{7});
}

TEST(RootState, FrequentFromQuantilesEmptyOnDistinctItems) {
    const double eps = 0.1;
    std::vector<ItemId> w;
    for (ItemId j = 0; j < 1000; ++j) w.push_back(j);
    RootState root(1, RootParams{eps, eps});
    root.ingest(total(0, 1000));
    root.ingest(Message::quantile_grid(0, grid_of(w, eps)));
    EXPECT_TRUE(root.frequent_from_quantiles(0.5).empty());
    EXPECT_THROW(root.frequent_from_quantiles(0.2), InputError);
}

TEST(RootState, ReingestingLastMessagesIsIdempotent) {
    RootState root(2, RootParams{0.1, 0.5});
    const std::vector<Message> last = {total(0, 100), total(1, 40), up(0, 1, 70), up(1, 1, 20), up(1, 2, 15),
                                       Message::quantile_grid(0, grid_of(std::vector<ItemId>(100, 1), 0.5))};
    for (const auto& m : last) root.ingest(m);
    const auto before = std::tuple(root.query_total(), root.query_item(1), root.query_item(2),
                                   root.query_frequent(0.3), root.query_quantile(0.5));
    for (const auto& m : last) root.ingest(m);
    EXPECT_EQ(before, std::tuple(root.query_total(), root.query_item(1), root.query_item(2),
                                 root.query_frequent(0.3), root.query_quantile(0.5)));
}
