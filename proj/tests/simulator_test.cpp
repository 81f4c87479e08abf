#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "slidemon/csv_io.hpp"
#include "slidemon/simulator.hpp"

using namespace slidemon;

namespace {

GeneratorSpec zipf_spec(std::uint64_t seed, double rate = 3.0, Tick duration = 1500) {
    GeneratorSpec g;
    g.kind = GeneratorKind::zipf;
    g.universe = 200;
    g.rate = rate;
    g.duration = duration;
    g.seed = seed;
    return g;
}

RunConfig zipf_run(std::size_t k, Tick w, double eps, Protocol p) {
    RunConfig cfg;
    for (std::size_t s = 0; s < k; ++s) cfg.generators.push_back(zipf_spec(100 + s));
    cfg.window = WindowConfig(w, 0);
    cfg.protocol = p;
    cfg.epsilon = eps;
    return cfg;
}

std::vector<LoggedMessage> golden_messages() {
    std::ifstream in(SLIDEMON_GOLDEN_DIR "/ac_rule_table.messages.csv");
    return csv::read_message_log(in, "golden");
}

}  // namespace

TEST(Simulator, EmptyStreamsSendNothing) {
    RunConfig cfg;
    cfg.traces = {{}, {}};
    cfg.window = WindowConfig(10, 0);
    const auto r = run_simulation(cfg);
    EXPECT_TRUE(r.messages.empty());
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(summarize_costs(r).max_window_words, 0);
}

TEST(Simulator, GoldenRuleTableTrace) {
    RunConfig cfg;
    cfg.traces = {csv::read_trace_file(SLIDEMON_GOLDEN_DIR "/ac_rule_table.trace.csv")};
    ASSERT_EQ(cfg.traces[0].size(), 10u);
    cfg.window = WindowConfig(4, 0);
    cfg.protocol = Protocol::ac;
    cfg.epsilon = 0.55;
    const auto r = run_simulation(cfg);
    EXPECT_EQ(r.last_tick, 11);
    EXPECT_EQ(r.messages, golden_messages());
    EXPECT_EQ(r.violations, 0);
}

TEST(Simulator, FiveZipfStreamsPassEveryAudit) {
    for (Protocol p : {Protocol::bc, Protocol::ac, Protocol::frequent}) {
        const auto r = run_simulation(zipf_run(5, 100, 0.1, p));
        EXPECT_EQ(r.violations, 0) << to_string(p);
        EXPECT_EQ(r.audit_every, 1);
        EXPECT_EQ(r.audited_ticks, r.ticks());
        EXPECT_FALSE(r.messages.empty());
    }
}

// Known limitation, also reported by the acceptance suite: with ranks being
// integers, the grid merge can overshoot eps*c when the union window holds
// only a few dozen elements (warm-up and drain here). Larger windows pass.
TEST(Simulator, QuantileMissesOnlyInTinyWindows) {
    const auto r = run_simulation(zipf_run(5, 100, 0.1, Protocol::quantile));
    Count misses = 0;
    for (const auto& a : r.audits) {
        if (a.pass) continue;
        ++misses;
        EXPECT_EQ(a.query, "quantile");
        EXPECT_GT(a.root_value, a.true_value) << "undershoot at tick " << a.tick;
        EXPECT_LE(a.true_value / a.phi, 40.0) << "miss in a large window at tick " << a.tick;
    }
    EXPECT_EQ(misses, r.violations);
}

TEST(Simulator, SimpleProtocolPassesAudit) {
    const auto r = run_simulation(zipf_run(2, 100, 0.2, Protocol::simple));
    EXPECT_EQ(r.violations, 0);
}

TEST(Simulator, OutOfOrderStreamsPassAudit) {
    auto cfg = zipf_run(3, 200, 0.1, Protocol::ac);
    for (auto& g : cfg.generators) g.tardiness = 50;
    cfg.window = WindowConfig(200, 50);
    EXPECT_EQ(run_simulation(cfg).violations, 0);
}

TEST(Simulator, LiveItemsBoundedByInverseLambda) {
    const auto r = run_simulation(zipf_run(2, 100, 0.2, Protocol::ac));
    EXPECT_EQ(r.live_limit, 55u);
    for (const auto& s : r.stats) EXPECT_LE(s.max_live, r.live_limit);
    EXPECT_EQ(r.live_violations, 0);
}

TEST(Simulator, TraceViolatingTardinessRejected) {
    RunConfig cfg;
    cfg.traces = {{{1, 0, 0}, {1, 2, 9}}};
    cfg.window = WindowConfig(10, 3);
    try {
        run_simulation(cfg);
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("element 2"), std::string::npos) << e.what();
    }
}

TEST(WindowCost, SumsWordsInsideWindow) {
    RunReport r;
    r.window = WindowConfig(3, 0);
    r.first_tick = 0;
    r.last_tick = 5;
    r.words_per_tick = {{2, 0, 0, 0, 2, 2}, {0, 0, 0, 0, 1, 0}};
    EXPECT_EQ(window_cost(r, 2).total_words, 2);
    EXPECT_EQ(window_cost(r, 3).total_words, 0);
    EXPECT_EQ(window_cost(r, 3).total_bits, 0);
    const auto c = window_cost(r, 5);
    EXPECT_EQ(c.words, (std::vector<Count>{4, 1}));
    EXPECT_EQ(c.total_words, 5);
    EXPECT_EQ(c.total_bits, 5 * 64);
    EXPECT_THROW(window_cost(r, -1), InputError);
    EXPECT_THROW(window_cost(r, 6), InputError);
    const auto s = summarize_costs(r);
    EXPECT_EQ(s.max_window_words, 5);
    EXPECT_EQ(s.total_words, 7);
}

TEST(WindowCost, SummaryMatchesDirectWindowSums) {
    const auto r = run_simulation(zipf_run(2, 100, 0.1, Protocol::ac));
    Count best = 0;
    for (Tick t = r.first_tick; t <= r.last_tick; ++t) best = std::max(best, window_cost(r, t).total_words);
    EXPECT_EQ(summarize_costs(r).max_window_words, best);
}

TEST(Simulator, SmallerEpsilonCostsMore) {
    const auto coarse = summarize_costs(run_simulation(zipf_run(1, 200, 0.2, Protocol::ac)));
    const auto fine = summarize_costs(run_simulation(zipf_run(1, 200, 0.1, Protocol::ac)));
    EXPECT_GE(fine.total_words, coarse.total_words);
}

TEST(Simulator, MessageLogReplayReproducesAnswers) {
    for (Protocol p : {Protocol::ac, Protocol::frequent, Protocol::quantile}) {
        auto cfg = zipf_run(3, 100, 0.2, p);
        cfg.record_answers = true;
        const auto r = run_simulation(cfg);
        std::stringstream buf;
        csv::write_message_log(buf, r.messages);
        const auto log = csv::read_message_log(buf);
        EXPECT_EQ(log, r.messages);
        EXPECT_EQ(replay_answers(log, 3, p, 0.2, cfg.phis, r.first_tick, r.last_tick), r.answers) << to_string(p);
    }
}

TEST(Simulator, IdenticalConfigsGiveIdenticalReports) {
    auto render = [] {
        const auto r = run_simulation(zipf_run(2, 100, 0.1, Protocol::frequent));
        std::ostringstream out;
        csv::write_message_log(out, r.messages);
        csv::write_audits(out, r);
        csv::write_costs(out, r);
        return out.str();
    };
    EXPECT_EQ(render(), render());
}

TEST(Simulator, ExpHistogramBackendRuns) {
    auto cfg = zipf_run(2, 100, 0.2, Protocol::bc);
    cfg.backend = Backend::exp_histogram;
    const auto r = run_simulation(cfg);
    EXPECT_EQ(r.violations, 0);
    EXPECT_GT(r.stats[0].max_buckets, 0u);
}

TEST(Simulator, DefaultAuditCadence) {
    EXPECT_EQ(default_audit_every(100000), 1);
    EXPECT_EQ(default_audit_every(100001), 11);
    EXPECT_EQ(default_audit_every(1000000), 100);
}
