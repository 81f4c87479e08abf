#include <cmath>
#include <deque>
#include <random>

#include <gtest/gtest.h>

#include "slidemon/exp_histogram.hpp"

using namespace slidemon;

namespace {

// Upper bound on the bucket count used by the acceptance suite as well.
constexpr double kBucketConstant = 8.0;

double bucket_bound(double lambda, double n) {
    return kBucketConstant / lambda * std::log2(std::max(2.0, lambda * n));
}

}  // namespace

TEST(ExpHistogram, ExactWhileSmall) {
    ExpHistogram eh(WindowConfig(10, 0), 0.5);
    for (Tick t = 0; t < 5; ++t) eh.add(t, t);
    eh.advance(5);
    EXPECT_EQ(eh.estimate(), 5);
    eh.advance(14);
    EXPECT_EQ(eh.estimate(), 0);
}

TEST(ExpHistogram, MergesRespectClassLimit) {
    const double lambda = 0.3;
    ExpHistogram eh(WindowConfig(100000, 0), lambda);
    for (Tick t = 0; t < 5000; ++t) {
        eh.add(t, t);
        eh.advance(t);
    }
    eh.advance(5000);
    EXPECT_EQ(eh.max_per_class(), 21u);
    // nothing expired, so every bucket is intact and the estimate is exact up
    // to half the oldest bucket
    EXPECT_LE(std::abs(eh.estimate() - 5000), static_cast<Count>(lambda / 12.0 * 5000) + 1);
}

TEST(ExpHistogram, RandomBurstsStayWithinRelativeError) {
    std::mt19937_64 rng(12);
    for (double lambda : {0.05, 0.12, 0.3}) {
        const Tick w = 200;
        ExpHistogram eh(WindowConfig(w, 0), lambda);
        std::deque<Tick> truth;
        for (Tick t = 0; t < 4000; ++t) {
            const int n = (t / 150) % 3 == 0 ? static_cast<int>(rng() % 40) : static_cast<int>(rng() % 3);
            for (int i = 0; i < n; ++i) {
                eh.add(t, t);
                truth.push_back(t);
            }
            eh.advance(t);
            while (!truth.empty() && truth.front() < t - w + 1) truth.pop_front();
            const auto c = static_cast<double>(truth.size());
            ASSERT_LE(std::abs(static_cast<double>(eh.estimate()) - c), lambda / 6.0 * c)
                << "lambda=" << lambda << " t=" << t;
        }
    }
}

TEST(ExpHistogram, OutOfOrderElementsCountedExactlyUntilFinal) {
    const Tick w = 50, tau = 10;
    ExpHistogram eh(WindowConfig(w, tau), 0.2);
    std::mt19937_64 rng(4);
    std::vector<std::pair<Tick, Tick>> seen;  // (timestamp, arrival)
    for (Tick t = 0; t < 1000; ++t) {
        for (int i = 0; i < 4; ++i) {
            const Tick ts = std::max<Tick>(0, t - static_cast<Tick>(rng() % (tau + 1)));
            eh.add(ts, t);
            seen.emplace_back(ts, t);
        }
        eh.advance(t);
        Count c = 0;
        for (auto [ts, a] : seen)
            if (ts >= t - w + 1 && ts <= t) ++c;
        ASSERT_LE(std::abs(static_cast<double>(eh.estimate() - c)), 0.2 / 6.0 * static_cast<double>(c)) << t;
    }
}

TEST(ExpHistogram, RejectsTimestampBeyondTardiness) {
    ExpHistogram eh(WindowConfig(50, 3), 0.2);
    eh.add(10, 10);
    eh.advance(20);
    EXPECT_THROW(eh.add(15, 20), InputError);
    EXPECT_NO_THROW(eh.add(17, 20));
}

TEST(ExpHistogram, BucketCountGrowsLogarithmically) {
    const double lambda = 0.1;
    for (int e = 10; e <= 17; ++e) {
        const double n = std::ldexp(1.0, e);
        const Tick w = 1000;
        const double rate = n / static_cast<double>(w);
        ExpHistogram eh(WindowConfig(w, 0), lambda);
        double carry = 0.0;
        std::size_t peak = 0;
        for (Tick t = 0; t < 2 * w; ++t) {
            carry += rate;
            for (; carry >= 1.0; carry -= 1.0) eh.add(t, t);
            eh.advance(t);
            peak = std::max(peak, eh.bucket_count());
        }
        EXPECT_LE(static_cast<double>(peak), bucket_bound(lambda, n)) << "n=2^" << e;
    }
}
