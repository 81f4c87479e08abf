#pragma once
// Deterministic discrete-time harness.
//
// Each tick: every site ingests the elements arriving at that tick, advances
// its estimator and runs its protocol; messages reach the coordinator in
// ascending stream order with zero latency; scheduled queries are then
// audited against the brute-force oracle. Per-tick message words feed the
// sliding-window cost accounting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coordinator.hpp"
#include "generator.hpp"
#include "oracle.hpp"
#include "protocol.hpp"
#include "types.hpp"
#include "window_estimator.hpp"

namespace slidemon {

enum class Protocol { bc, ac, simple, quantile, frequent };

inline std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::bc: return "bc";
        case Protocol::ac: return "ac";
        case Protocol::simple: return "simple";
        case Protocol::quantile: return "quantile";
        case Protocol::frequent: return "frequent";
    }
    return "?";
}

inline Protocol parse_protocol(const std::string& s) {
    if (s == "bc") return Protocol::bc;
    if (s == "ac") return Protocol::ac;
    if (s == "simple") return Protocol::simple;
    if (s == "quantile") return Protocol::quantile;
    if (s == "frequent") return Protocol::frequent;
    throw InputError("unknown protocol '" + s + "'");
}

struct RunConfig {
    // one generator per stream, ignored when `traces` is non-empty
    std::vector<GeneratorSpec> generators;
    std::vector<std::vector<TimedItem>> traces;
    WindowConfig window;
    Protocol protocol = Protocol::ac;
    double epsilon = 0.1;
    Backend backend = Backend::exact;
    // 0 selects the default cadence
    Tick audit_every = 0;
    std::vector<double> phis = {0.1, 0.25, 0.5, 0.75, 1.0};
    int word_size_bits = 64;
    // keep running W ticks past the last arrival so every element expires
    bool drain = true;
    bool record_answers = false;

    std::size_t streams() const { return traces.empty() ? generators.size() : traces.size(); }

    void validate() const {
        window.validate();
        ProtocolParams::check_epsilon(epsilon);
        if (streams() == 0) throw InputError("at least one stream is required");
        if (audit_every < 0) throw InputError("audit cadence must be nonnegative");
        if (word_size_bits <= 0) throw InputError("word size must be positive");
        for (double phi : phis)
            if (!(phi > 0.0 && phi <= 1.0)) throw InputError("query fractions must lie in (0,1]");
    }
};

struct AuditRecord {
    Tick tick = 0;
    std::string query;
    double phi = 0.0;
    double true_value = 0.0;
    double root_value = 0.0;
    double allowed_err = 0.0;
    double abs_err = 0.0;
    bool pass = true;
};

struct LoggedMessage {
    Tick tick = 0;
    Message msg;

    friend bool operator==(const LoggedMessage&, const LoggedMessage&) = default;
};

struct StreamStats {
    // largest |{j : off_j = false}| seen after any tick
    std::size_t max_live = 0;
    std::size_t max_tracked = 0;
    std::size_t max_buckets = 0;
    Count max_churn = 0;
    Count items = 0;
};

struct RunReport {
    WindowConfig window;
    Protocol protocol = Protocol::ac;
    double epsilon = 0.1;
    int word_size_bits = 64;
    Tick first_tick = 0;
    Tick last_tick = -1;
    Tick audit_every = 1;

    std::vector<AuditRecord> audits;
    Count violations = 0;
    Count audited_ticks = 0;

    // words_per_tick[s][t - first_tick]
    std::vector<std::vector<Count>> words_per_tick;
    std::vector<LoggedMessage> messages;
    std::vector<StreamStats> stats;
    // largest sum of per-stream churn at one tick
    Count max_total_churn = 0;

    // live-item bound bookkeeping for protocols running AC
    std::size_t live_limit = 0;
    Count live_violations = 0;

    // root answer digest per tick when record_answers is set
    std::vector<std::pair<Tick, std::string>> answers;

    std::size_t streams() const { return words_per_tick.size(); }
    Tick ticks() const { return last_tick - first_tick + 1; }
};

struct WindowCost {
    std::vector<Count> words;
    Count total_words = 0;
    Count total_bits = 0;
};

/// Message words with send tick in [t - W + 1, t], per stream and summed.
inline WindowCost window_cost(const RunReport& r, Tick t) {
    if (t < r.first_tick || t > r.last_tick)
        throw InputError("tick " + std::to_string(t) + " outside the run");
    WindowCost out;
    const Tick lo = std::max(r.first_tick, r.window.start(t));
    for (const auto& per_tick : r.words_per_tick) {
        Count w = 0;
        for (Tick u = lo; u <= t; ++u) w += per_tick[static_cast<std::size_t>(u - r.first_tick)];
        out.words.push_back(w);
        out.total_words += w;
    }
    out.total_bits = out.total_words * r.word_size_bits;
    return out;
}

struct CostSummary {
    Count max_window_words = 0;
    double mean_window_words = 0.0;
    std::vector<Count> max_stream_window_words;
    Count total_words = 0;
};

/// Worst and mean window cost over every anchor tick of the run.
inline CostSummary summarize_costs(const RunReport& r) {
    CostSummary out;
    out.max_stream_window_words.assign(r.streams(), 0);
    if (r.ticks() <= 0) return out;
    const auto n = static_cast<std::size_t>(r.ticks());
    const auto w = static_cast<std::size_t>(r.window.length);
    std::vector<Count> total(n, 0);
    for (std::size_t s = 0; s < r.streams(); ++s) {
        Count running = 0;
        for (std::size_t i = 0; i < n; ++i) {
            running += r.words_per_tick[s][i];
            if (i >= w) running -= r.words_per_tick[s][i - w];
            total[i] += running;
            out.max_stream_window_words[s] = std::max(out.max_stream_window_words[s], running);
            out.total_words += r.words_per_tick[s][i];
        }
    }
    double sum = 0.0;
    for (Count c : total) {
        out.max_window_words = std::max(out.max_window_words, c);
        sum += static_cast<double>(c);
    }
    out.mean_window_words = sum / static_cast<double>(n);
    return out;
}

/// Audit cadence when none is configured: every tick up to 1e5 elements,
/// otherwise every ceil(n / 1e4) ticks.
inline Tick default_audit_every(Count total_items) {
    if (total_items <= 100000) return 1;
    return (total_items + 9999) / 10000;
}

/// Compact textual form of every root answer, used to compare replays.
inline std::string describe_answers(const RootState& root, Protocol p, const std::vector<double>& phis) {
    std::string out = "total=" + std::to_string(root.query_total());
    if (p == Protocol::ac || p == Protocol::simple || p == Protocol::frequent) {
        std::vector<std::pair<ItemId, Count>> items(root.item_estimates().begin(),
                                                    root.item_estimates().end());
        std::sort(items.begin(), items.end());
        out += ";items=";
        for (const auto& [j, v] : items) out += std::to_string(j) + ":" + std::to_string(v) + ",";
    }
    for (double phi : phis) {
        if (p == Protocol::frequent) {
            out += ";freq@" + std::to_string(phi) + "=";
            for (ItemId j : root.query_frequent(phi).items) out += std::to_string(j) + ",";
        }
        if (p == Protocol::quantile && root.has_grid() && root.query_total() > 0)
            out += ";q@" + std::to_string(phi) + "=" + std::to_string(root.query_quantile(phi));
    }
    return out;
}

inline RootParams root_params_for(Protocol, double eps) {
    return RootParams{eps, eps};
}

namespace detail {

// Protocol instances running at one stream over a shared estimator.
struct Site {
    WindowEstimator est;
    std::optional<SiteState> totals;
    std::optional<SiteState> items;
    std::optional<SiteState> grid;
    Protocol protocol;

    std::vector<Message> advance(Tick now) {
        est.advance(now);
        std::vector<Message> out;
        auto append = [&out](std::vector<Message> v) {
            for (auto& m : v) out.push_back(std::move(m));
        };
        if (totals) append(bc_on_advance(*totals, est, now));
        if (items) {
            if (protocol == Protocol::simple)
                append(simple_on_advance(*items, est, now));
            else
                append(ac_on_advance(*items, est, now));
        }
        if (grid) append(quantile_on_advance(*grid, est, now));
        return out;
    }
};

inline Site make_site(StreamId s, const RunConfig& cfg) {
    std::optional<SiteState> totals, items, grid;
    const double eps = cfg.epsilon;
    switch (cfg.protocol) {
        case Protocol::bc:
            totals.emplace(s, ProtocolParams::basic_counting(eps));
            break;
        case Protocol::ac:
        case Protocol::simple:
            items.emplace(s, ProtocolParams::approximate_counting(eps));
            break;
        case Protocol::quantile: {
            grid.emplace(s, ProtocolParams::quantiles(eps));
            totals.emplace(s, ProtocolParams::basic_counting(grid->params.lambda));
            break;
        }
        case Protocol::frequent:
            totals.emplace(s, ProtocolParams::basic_counting(eps / 24.0));
            items.emplace(s, ProtocolParams::approximate_counting(11.0 * eps / 24.0));
            break;
    }
    double lambda = 1.0;
    for (const auto* st : {&totals, &items, &grid})
        if (*st) lambda = std::min(lambda, (*st)->params.lambda);
    for (auto* st : {&totals, &items, &grid})
        if (*st) (*st)->params.word_size_bits = cfg.word_size_bits;
    return Site{WindowEstimator(cfg.window, lambda, cfg.backend), std::move(totals), std::move(items),
                std::move(grid), cfg.protocol};
}

inline bool within(double err, double allowed) { return err <= allowed + slack(allowed); }

class Auditor {
public:
    Auditor(const RunConfig& cfg, RunReport& report) : cfg_(cfg), report_(report) {}

    void audit(Tick t, const WindowSnapshot& truth, const RootState& root) {
        const double c = static_cast<double>(truth.total());
        const double eps = cfg_.epsilon;
        switch (cfg_.protocol) {
            case Protocol::bc:
                total(t, truth, root, eps);
                break;
            case Protocol::ac:
            case Protocol::simple:
                items(t, truth, root, eps);
                break;
            case Protocol::frequent:
                total(t, truth, root, eps / 24.0);
                items(t, truth, root, 11.0 * eps / 24.0);
                for (double phi : cfg_.phis) frequent(t, truth, root, phi);
                break;
            case Protocol::quantile:
                total(t, truth, root, eps / 20.0);
                if (c > 0)
                    for (double phi : cfg_.phis) quantile(t, truth, root, phi);
                break;
        }
    }

private:
    void record(AuditRecord rec) {
        if (!rec.pass) ++report_.violations;
        report_.audits.push_back(std::move(rec));
    }

    void total(Tick t, const WindowSnapshot& truth, const RootState& root, double eps) {
        const double c = static_cast<double>(truth.total());
        const double r = static_cast<double>(root.query_total());
        const double err = std::abs(r - c);
        record({t, "total", 0.0, c, r, eps * c, err, within(err, eps * c)});
    }

    // one record per tick: the item with the largest error
    void items(Tick t, const WindowSnapshot& truth, const RootState& root, double eps) {
        const double allowed = eps * static_cast<double>(truth.total());
        double worst = -1.0;
        ItemId worst_item = 0;
        for (const auto& [j, cj] : truth.counts()) {
            const double err = std::abs(static_cast<double>(root.query_item(j) - cj));
            if (err > worst) worst = err, worst_item = j;
        }
        for (const auto& [j, v] : root.item_estimates()) {
            if (truth.count(j) != 0) continue;
            const double err = std::abs(static_cast<double>(v));
            if (err > worst) worst = err, worst_item = j;
        }
        if (worst < 0) worst = 0.0;
        record({t, "item", 0.0, static_cast<double>(truth.count(worst_item)),
                static_cast<double>(root.query_item(worst_item)), allowed, worst, within(worst, allowed)});
    }

    // abs_err counts required items missed plus excluded items returned
    void frequent(Tick t, const WindowSnapshot& truth, const RootState& root, double phi) {
        const double c = static_cast<double>(truth.total());
        const FrequentResult got = root.query_frequent(phi);
        const std::vector<ItemId> must = truth.items_at_least(phi * c - slack(phi * c));
        Count wrong = 0;
        for (ItemId j : must)
            if (!std::binary_search(got.items.begin(), got.items.end(), j)) ++wrong;
        const double floor = (phi - cfg_.epsilon) * c;
        for (ItemId j : got.items)
            if (static_cast<double>(truth.count(j)) < floor - slack(floor)) ++wrong;
        record({t, "frequent", phi, static_cast<double>(must.size()), static_cast<double>(got.items.size()),
                0.0, static_cast<double>(wrong), wrong == 0});
    }

    void quantile(Tick t, const WindowSnapshot& truth, const RootState& root, double phi) {
        const double c = static_cast<double>(truth.total());
        const double target = phi * c;
        const double allowed = cfg_.epsilon * c;
        AuditRecord rec{t, "quantile", phi, target, 0.0, allowed, 0.0, false};
        try {
            const ItemId answer = root.query_quantile(phi);
            const auto [lo, hi] = truth.rank_range(answer);
            const double nearest = std::clamp(target, static_cast<double>(lo), static_cast<double>(hi));
            rec.root_value = nearest;
            rec.abs_err = std::abs(nearest - target);
            rec.pass = within(rec.abs_err, allowed);
        } catch (const InputError&) {
            rec.abs_err = c;
        }
        record(std::move(rec));
    }

    const RunConfig& cfg_;
    RunReport& report_;
};

}  // namespace detail

inline RunReport run_simulation(const RunConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<TimedItem>> streams = cfg.traces;
    Tick horizon = 0;
    if (streams.empty()) {
        for (const GeneratorSpec& g : cfg.generators) {
            streams.push_back(generate_stream(g));
            horizon = std::max(horizon, g.duration - 1);
        }
    }
    const std::size_t k = streams.size();
    Count total_items = 0;
    for (const auto& s : streams) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            try {
                check_tardiness(s[i], cfg.window);
            } catch (const InputError& e) {
                throw InputError("element " + std::to_string(i + 1) + ": " + e.what());
            }
            if (i > 0 && s[i].arrival < s[i - 1].arrival)
                throw InputError("element " + std::to_string(i + 1) + ": arrival regression");
        }
        if (!s.empty()) horizon = std::max(horizon, s.back().arrival);
        total_items += static_cast<Count>(s.size());
    }

    RunReport report;
    report.window = cfg.window;
    report.protocol = cfg.protocol;
    report.epsilon = cfg.epsilon;
    report.word_size_bits = cfg.word_size_bits;
    report.first_tick = 0;
    report.last_tick = horizon + (cfg.drain ? cfg.window.length : 0);
    report.audit_every = cfg.audit_every > 0 ? cfg.audit_every : default_audit_every(total_items);
    report.words_per_tick.assign(k, std::vector<Count>(static_cast<std::size_t>(report.ticks()), 0));
    report.stats.assign(k, StreamStats{});

    std::vector<detail::Site> sites;
    sites.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        sites.push_back(detail::make_site(static_cast<StreamId>(s), cfg));
        report.stats[s].items = static_cast<Count>(streams[s].size());
    }
    if (sites.front().items && cfg.protocol != Protocol::simple)
        report.live_limit = static_cast<std::size_t>(
            std::floor(1.0 / sites.front().items->params.lambda * (1.0 + detail::kCompareSlack)));

    RootState root(k, root_params_for(cfg.protocol, cfg.epsilon));
    const Oracle oracle(streams, cfg.window);
    detail::Auditor auditor(cfg, report);
    std::vector<std::size_t> cursor(k, 0);

    for (Tick t = report.first_tick; t <= report.last_tick; ++t) {
        Count churn = 0;
        std::vector<std::vector<Message>> outbox(k);
        for (std::size_t s = 0; s < k; ++s) {
            auto& site = sites[s];
            while (cursor[s] < streams[s].size() && streams[s][cursor[s]].arrival == t)
                site.est.insert(streams[s][cursor[s]++]);
            outbox[s] = site.advance(t);

            StreamStats& st = report.stats[s];
            const Count c = site.est.churn();
            st.max_churn = std::max(st.max_churn, c);
            churn += c;
            st.max_buckets = std::max(st.max_buckets, site.est.bucket_count());
            if (site.items) {
                st.max_tracked = std::max(st.max_tracked, site.items->last_sent.size());
                if (cfg.protocol != Protocol::simple) {
                    st.max_live = std::max(st.max_live, site.items->live_count());
                    if (site.items->live_count() > report.live_limit) ++report.live_violations;
                }
            }
        }
        report.max_total_churn = std::max(report.max_total_churn, churn);
        for (std::size_t s = 0; s < k; ++s) {
            for (Message& m : outbox[s]) {
                root.ingest(m);
                report.words_per_tick[s][static_cast<std::size_t>(t - report.first_tick)] += m.words();
                report.messages.push_back(LoggedMessage{t, std::move(m)});
            }
        }
        if ((t - report.first_tick) % report.audit_every == 0) {
            auditor.audit(t, oracle.window(t), root);
            ++report.audited_ticks;
        }
        if (cfg.record_answers) report.answers.emplace_back(t, describe_answers(root, cfg.protocol, cfg.phis));
    }
    report.violations += report.live_violations;
    return report;
}

/// Re-ingests a message log into a fresh coordinator and reproduces the
/// per-tick answer digests of the original run.
inline std::vector<std::pair<Tick, std::string>> replay_answers(const std::vector<LoggedMessage>& log,
                                                               std::size_t streams, Protocol p, double eps,
                                                               const std::vector<double>& phis, Tick first,
                                                               Tick last) {
    RootState root(streams, root_params_for(p, eps));
    std::vector<std::pair<Tick, std::string>> out;
    std::size_t i = 0;
    for (Tick t = first; t <= last; ++t) {
        while (i < log.size() && log[i].tick == t) root.ingest(log[i++].msg);
        out.emplace_back(t, describe_answers(root, p, phis));
    }
    return out;
}

}  // namespace slidemon
