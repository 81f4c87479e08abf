#pragma once
// Batch experiments: flat key = value config files, sweep expansion, report
// files per sweep point, and the scaling summary fitted over a report dir.
//
// Config keys (sweep axes take comma lists):
//
//   name         prefix of output files                  (default "run")
//   output       output directory                        (default "out")
//   streams      number of streams k                     (default 1)
//   generator    uniform | zipf | burst | adversarial    (default zipf)
//   zipf_s, universe, rate, duration, phase, seed        generator settings
//   items        sweep: items per stream (sets duration = ceil(items/rate))
//   traces       comma list of trace files, one per stream (replaces generator)
//   window       W in ticks
//   tau          sweep: tardiness
//   protocol     bc | ac | simple | quantile | frequent
//   epsilon      sweep: error target
//   backend      exact | eh
//   audit_every  0 = default cadence
//   phis         query fractions
//   word_bits    bits per word                           (default 64)
//   drain        run W ticks past the last arrival       (default true)
//   write_traces also write the generated traces         (default false)
//
// Sweeps are the cross product epsilon x items x tau, in that nesting order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "csv_io.hpp"
#include "simulator.hpp"

namespace slidemon {

struct ExperimentConfig {
    std::string name = "run";
    std::string output = "out";
    std::size_t streams = 1;
    GeneratorSpec generator{GeneratorKind::zipf};
    std::vector<std::string> traces;
    Tick window = 100;
    Protocol protocol = Protocol::ac;
    Backend backend = Backend::exact;
    Tick audit_every = 0;
    std::vector<double> phis = {0.1, 0.25, 0.5, 0.75, 1.0};
    int word_bits = 64;
    bool drain = true;
    bool write_traces = false;

    std::vector<double> epsilons = {0.1};
    std::vector<Count> items;  // empty: use generator duration
    std::vector<Tick> taus = {0};
};

struct SweepPoint {
    std::size_t index = 0;
    double epsilon = 0.1;
    std::optional<Count> items;
    Tick tau = 0;

    std::string label(const std::string& name) const {
        std::string s = name + "_p" + std::to_string(index) + "_eps" + csv::format_double(epsilon);
        if (items) s += "_n" + std::to_string(*items);
        s += "_tau" + std::to_string(tau);
        return s;
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    for (auto cell : csv::split(v)) {
        auto t = csv::trim(cell);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

template <typename T>
T parse_value(const std::string& key, std::string_view v) {
    T out{};
    if (!csv::parse_number(v, out))
        throw InputError("config key '" + key + "': cannot parse '" + std::string(v) + "'");
    return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
    std::vector<T> out;
    for (const auto& cell : split_list(v)) out.push_back(parse_value<T>(key, cell));
    if (out.empty()) throw InputError("config key '" + key + "' needs at least one value");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InputError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Parses a config. `seed_override` (from the environment) replaces `seed`.
inline ExperimentConfig parse_experiment(std::istream& in, const std::string& source = "config",
                                         std::optional<std::uint64_t> seed_override = std::nullopt) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string_view row = csv::trim(std::string_view(line).substr(0, hash));
        if (row.empty()) continue;
        const auto eq = row.find('=');
        auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
        if (eq == std::string_view::npos) throw InputError(where() + "expected key = value");
        const std::string key(csv::trim(row.substr(0, eq)));
        const std::string value(csv::trim(row.substr(eq + 1)));
        if (!seen.insert(key).second) throw InputError(where() + "duplicate key '" + key + "'");
        try {
            if (key == "name") cfg.name = value;
            else if (key == "output") cfg.output = value;
            else if (key == "streams") cfg.streams = detail::parse_value<std::size_t>(key, value);
            else if (key == "generator") cfg.generator.kind = parse_generator_kind(value);
            else if (key == "zipf_s") cfg.generator.zipf_s = detail::parse_value<double>(key, value);
            else if (key == "universe") cfg.generator.universe = detail::parse_value<ItemId>(key, value);
            else if (key == "rate") cfg.generator.rate = detail::parse_value<double>(key, value);
            else if (key == "duration") cfg.generator.duration = detail::parse_value<Tick>(key, value);
            else if (key == "phase") cfg.generator.phase = detail::parse_value<Tick>(key, value);
            else if (key == "seed") cfg.generator.seed = detail::parse_value<std::uint64_t>(key, value);
            else if (key == "items") cfg.items = detail::parse_list<Count>(key, value);
            else if (key == "traces") cfg.traces = detail::split_list(value);
            else if (key == "window") cfg.window = detail::parse_value<Tick>(key, value);
            else if (key == "tau") cfg.taus = detail::parse_list<Tick>(key, value);
            else if (key == "protocol") cfg.protocol = parse_protocol(value);
            else if (key == "epsilon") cfg.epsilons = detail::parse_list<double>(key, value);
            else if (key == "backend") cfg.backend = parse_backend(value);
            else if (key == "audit_every") cfg.audit_every = detail::parse_value<Tick>(key, value);
            else if (key == "phis") cfg.phis = detail::parse_list<double>(key, value);
            else if (key == "word_bits") cfg.word_bits = detail::parse_value<int>(key, value);
            else if (key == "drain") cfg.drain = detail::parse_bool(key, value);
            else if (key == "write_traces") cfg.write_traces = detail::parse_bool(key, value);
            else throw InputError("unknown key '" + key + "'");
        } catch (const InputError& e) {
            const std::string msg = e.what();
            throw InputError(msg.starts_with(source) ? msg : where() + msg);
        }
    }
    if (seed_override) cfg.generator.seed = *seed_override;

    if (cfg.streams == 0) throw InputError(source + ": streams must be at least 1");
    if (!cfg.traces.empty()) cfg.streams = cfg.traces.size();
    for (double eps : cfg.epsilons) {
        try {
            ProtocolParams::check_epsilon(eps);
        } catch (const InputError& e) {
            throw InputError(source + ": " + e.what());
        }
    }
    for (Count n : cfg.items)
        if (n < 0) throw InputError(source + ": items must be nonnegative");
    for (Tick tau : cfg.taus) WindowConfig(cfg.window, tau).validate();
    return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path,
                                        std::optional<std::uint64_t> seed_override = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config '" + path + "'");
    return parse_experiment(in, path, seed_override);
}

inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg) {
    std::vector<SweepPoint> out;
    std::vector<std::optional<Count>> sizes;
    if (cfg.items.empty()) sizes.emplace_back();
    for (Count n : cfg.items) sizes.emplace_back(n);
    for (double eps : cfg.epsilons)
        for (const auto& n : sizes)
            for (Tick tau : cfg.taus) out.push_back(SweepPoint{out.size(), eps, n, tau});
    return out;
}

inline RunConfig make_run_config(const ExperimentConfig& cfg, const SweepPoint& pt) {
    RunConfig rc;
    rc.window = WindowConfig{cfg.window, pt.tau};
    rc.protocol = cfg.protocol;
    rc.epsilon = pt.epsilon;
    rc.backend = cfg.backend;
    rc.audit_every = cfg.audit_every;
    rc.phis = cfg.phis;
    rc.word_size_bits = cfg.word_bits;
    rc.drain = cfg.drain;
    if (!cfg.traces.empty()) {
        for (const auto& path : cfg.traces) rc.traces.push_back(csv::read_trace_file(path, &rc.window));
        return rc;
    }
    for (std::size_t s = 0; s < cfg.streams; ++s) {
        GeneratorSpec g = cfg.generator;
        g.tardiness = pt.tau;
        g.seed = cfg.generator.seed + 0x9E3779B97F4A7C15ULL * (s + 1);
        if (pt.items) {
            g.duration = g.rate > 0.0 ? static_cast<Tick>(std::ceil(static_cast<double>(*pt.items) / g.rate)) : 0;
        }
        rc.generators.push_back(g);
    }
    return rc;
}

struct PointResult {
    SweepPoint point;
    std::string label;
    Count total_items = 0;
    Count max_churn = 0;
    CostSummary cost;
    Count violations = 0;
    std::size_t max_live = 0;
    std::size_t live_limit = 0;
};

inline const char* kSummaryHeader =
    "point,label,protocol,streams,window,epsilon,items,tau,total_items,max_churn,"
    "max_window_words,mean_window_words,max_window_bits,violations,max_live,live_limit";

/// Runs every sweep point, writing `<label>.audit.csv`, `.cost.csv`,
/// `.messages.csv` per point and `summary.csv` into the output directory.
inline std::vector<PointResult> run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<PointResult> results;
    for (const SweepPoint& pt : expand_sweep(cfg)) {
        RunConfig rc = make_run_config(cfg, pt);
        if (rc.traces.empty()) {
            for (const auto& g : rc.generators) rc.traces.push_back(generate_stream(g));
            rc.generators.clear();
        }
        const RunReport report = run_simulation(rc);

        PointResult res;
        res.point = pt;
        res.label = pt.label(cfg.name);
        for (const auto& t : rc.traces) res.total_items += static_cast<Count>(t.size());
        res.max_churn = report.max_total_churn;
        res.cost = summarize_costs(report);
        res.violations = report.violations;
        for (const auto& st : report.stats) res.max_live = std::max(res.max_live, st.max_live);
        res.live_limit = report.live_limit;

        const fs::path base = fs::path(out_dir) / res.label;
        {
            std::ofstream f(base.string() + ".audit.csv");
            csv::write_audits(f, report);
        }
        {
            std::ofstream f(base.string() + ".cost.csv");
            csv::write_costs(f, report);
        }
        {
            std::ofstream f(base.string() + ".messages.csv");
            csv::write_message_log(f, report.messages);
        }
        if (cfg.write_traces) {
            for (std::size_t s = 0; s < rc.traces.size(); ++s) {
                std::ofstream f(base.string() + ".stream" + std::to_string(s) + ".trace.csv");
                csv::write_trace(f, rc.traces[s]);
            }
        }
        results.push_back(std::move(res));
    }

    std::ofstream summary(fs::path(out_dir) / "summary.csv");
    summary << kSummaryHeader << '\n';
    for (const auto& r : results) {
        summary << r.point.index << ',' << r.label << ',' << to_string(cfg.protocol) << ',' << cfg.streams << ','
                << cfg.window << ',' << csv::format_double(r.point.epsilon) << ','
                << (r.point.items ? std::to_string(*r.point.items) : std::string()) << ',' << r.point.tau << ','
                << r.total_items << ',' << r.max_churn << ',' << r.cost.max_window_words << ','
                << csv::format_double(r.cost.mean_window_words) << ',' << r.cost.max_window_words * cfg.word_bits
                << ',' << r.violations << ',' << r.max_live << ',' << r.live_limit << '\n';
    }
    return results;
}

// ---------------------------------------------------------------------------
// scaling summary

struct SummaryRow {
    std::string label;
    double epsilon = 0.0;
    std::string items;
    Tick tau = 0;
    Count max_churn = 0;
    Count words = 0;
};

struct FitRow {
    std::string group;
    std::string label;
    double epsilon = 0.0;
    Count churn = 0;
    Tick tau = 0;
    Count words = 0;
    double x = 0.0;
    double fitted_c = 0.0;
    double residual = 0.0;
};

struct AxisCheck {
    std::string axis;
    std::string group;
    std::string metric;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = true;
};

struct ScalingSummary {
    std::vector<FitRow> fits;
    std::vector<AxisCheck> checks;
};

inline std::vector<SummaryRow> read_summary(std::istream& in, const std::string& source) {
    std::vector<SummaryRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 || csv::trim(line).empty()) continue;
        const auto cells = csv::split(csv::trim(line));
        if (cells.size() != 16) throw InputError(source + ":" + std::to_string(lineno) + ": expected 16 columns");
        SummaryRow r;
        r.label = std::string(cells[1]);
        if (!csv::parse_number(cells[5], r.epsilon) || !csv::parse_number(cells[7], r.tau) ||
            !csv::parse_number(cells[9], r.max_churn) || !csv::parse_number(cells[10], r.words))
            throw InputError(source + ":" + std::to_string(lineno) + ": malformed row");
        r.items = std::string(cells[6]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Scale variable of the per-window bound: (1/eps) * log2 n.
inline double cost_scale(double eps, Count churn) {
    return std::log2(static_cast<double>(std::max<Count>(churn, 2))) / eps;
}

/// Least-squares fit words ~ C * (1/eps) log2 n, globally ("all") and within
/// each group of points that differ along a single sweep axis, plus the
/// per-axis ratio checks (eps halving ratio in [1.5, 3]; words / log2 n
/// spread <= 2 along the size axis).
inline ScalingSummary scaling_summary(const std::vector<SummaryRow>& rows) {
    ScalingSummary out;
    auto fit = [&](const std::string& group, const std::vector<const SummaryRow*>& pts) {
        double sxy = 0.0, sxx = 0.0;
        for (const auto* r : pts) {
            const double x = cost_scale(r->epsilon, r->max_churn);
            sxy += x * static_cast<double>(r->words);
            sxx += x * x;
        }
        const double c = sxx > 0 ? sxy / sxx : 0.0;
        for (const auto* r : pts) {
            const double x = cost_scale(r->epsilon, r->max_churn);
            out.fits.push_back({group, r->label, r->epsilon, r->max_churn, r->tau, r->words, x, c,
                                static_cast<double>(r->words) - c * x});
        }
    };
    std::vector<const SummaryRow*> all;
    for (const auto& r : rows) all.push_back(&r);
    if (all.empty()) return out;
    fit("all", all);

    std::map<std::string, std::vector<const SummaryRow*>> by_eps_axis, by_items_axis, by_tau_axis;
    for (const auto& r : rows) {
        by_eps_axis["items=" + r.items + ";tau=" + std::to_string(r.tau)].push_back(&r);
        by_items_axis["eps=" + csv::format_double(r.epsilon) + ";tau=" + std::to_string(r.tau)].push_back(&r);
        by_tau_axis["eps=" + csv::format_double(r.epsilon) + ";items=" + r.items].push_back(&r);
    }
    for (auto& [key, pts] : by_eps_axis) {
        if (pts.size() < 2) continue;
        fit("epsilon|" + key, pts);
        std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->epsilon > b->epsilon; });
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (std::abs(pts[i - 1]->epsilon / pts[i]->epsilon - 2.0) > 1e-6) continue;
            const double ratio = pts[i - 1]->words > 0
                                     ? static_cast<double>(pts[i]->words) / static_cast<double>(pts[i - 1]->words)
                                     : 0.0;
            out.checks.push_back({"epsilon", key,
                                  "words(eps=" + csv::format_double(pts[i]->epsilon) + ")/words(eps=" +
                                      csv::format_double(pts[i - 1]->epsilon) + ")",
                                  ratio, 1.5, 3.0, ratio >= 1.5 && ratio <= 3.0});
        }
    }
    for (auto& [key, pts] : by_items_axis) {
        std::set<std::string> sizes;
        for (auto* p : pts) sizes.insert(p->items);
        if (sizes.size() < 2) continue;
        fit("items|" + key, pts);
        double lo = 1e300, hi = 0.0;
        for (auto* p : pts) {
            const double v = static_cast<double>(p->words) / std::log2(static_cast<double>(std::max<Count>(p->max_churn, 2)));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double spread = lo > 0 ? hi / lo : 0.0;
        out.checks.push_back({"items", key, "max/min of words/log2(n)", spread, 1.0, 2.0, lo > 0 && spread <= 2.0});
    }
    for (auto& [key, pts] : by_tau_axis) {
        std::set<Tick> taus;
        for (auto* p : pts) taus.insert(p->tau);
        if (taus.size() < 2) continue;
        fit("tau|" + key, pts);
    }
    return out;
}

inline void write_scaling(std::ostream& fits, std::ostream& checks, const ScalingSummary& s) {
    fits << "group,label,epsilon,n,tau,words,x,fitted_c,residual\n";
    for (const auto& f : s.fits)
        fits << f.group << ',' << f.label << ',' << csv::format_double(f.epsilon) << ',' << f.churn << ','
             << f.tau << ',' << f.words << ',' << csv::format_double(f.x) << ',' << csv::format_double(f.fitted_c)
             << ',' << csv::format_double(f.residual) << '\n';
    checks << "axis,group,metric,value,lo,hi,pass\n";
    for (const auto& c : s.checks)
        checks << c.axis << ',' << c.group << ',' << c.metric << ',' << csv::format_double(c.value) << ','
               << csv::format_double(c.lo) << ',' << csv::format_double(c.hi) << ',' << (c.pass ? 1 : 0) << '\n';
}

/// Reads `summary.csv` from a report dir and writes `scaling.csv` and
/// `scaling_checks.csv` next to it.
inline ScalingSummary report_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path summary = fs::path(dir) / "summary.csv";
    std::ifstream in(summary);
    if (!in) throw InputError("no summary.csv in '" + dir + "'");
    const auto rows = read_summary(in, summary.string());
    if (rows.empty()) throw InputError(summary.string() + ": no completed runs");
    ScalingSummary s = scaling_summary(rows);
    std::ofstream fits(fs::path(dir) / "scaling.csv");
    std::ofstream checks(fs::path(dir) / "scaling_checks.csv");
    write_scaling(fits, checks, s);
    return s;
}

}  // namespace slidemon
