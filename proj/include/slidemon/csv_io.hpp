#pragma once
// CSV formats: traces, message logs, audit reports and window-cost tables.
//
//   trace        arrival_tick,timestamp,item_id          (header optional)
//   message log  tick,stream_id,kind,item_id,value,words (grid values in
//                `value`, ';'-separated; item_id empty for totals and grids)
//   audit        tick,query,phi,true_value,root_value,allowed_err,abs_err,pass
//   cost         window_anchor,stream_id,words,bits      (stream_id "total"
//                for the sum over streams; anchors whose window carries no
//                message are omitted)

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "simulator.hpp"
#include "types.hpp"

namespace slidemon::csv {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

/// Reads a trace. Rows must be ascending in arrival; with `window` given the
/// tardiness bound is checked too. Errors name `source` and the line.
inline std::vector<TimedItem> read_trace(std::istream& in, const std::string& source = "trace",
                                         const WindowConfig* window = nullptr) {
    std::vector<TimedItem> out;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        throw InputError(source + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto cells = split(row);
        if (cells.size() != 3) fail("expected 3 columns, got " + std::to_string(cells.size()));
        TimedItem it;
        if (!parse_number(cells[0], it.arrival) || !parse_number(cells[1], it.timestamp) ||
            !parse_number(cells[2], it.item)) {
            if (out.empty() && lineno == 1) continue;  // header
            fail("malformed row '" + std::string(row) + "'");
        }
        if (!out.empty() && it.arrival < out.back().arrival)
            fail("arrival regression: " + std::to_string(it.arrival) + " after " +
                 std::to_string(out.back().arrival));
        if (it.timestamp < 0) fail("negative timestamp");
        if (it.arrival < it.timestamp) fail("arrival precedes timestamp");
        if (window) {
            try {
                check_tardiness(it, *window);
            } catch (const InputError& e) {
                fail(e.what());
            }
        }
        out.push_back(it);
    }
    return out;
}

inline std::vector<TimedItem> read_trace_file(const std::string& path, const WindowConfig* window = nullptr) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read trace '" + path + "'");
    return read_trace(in, path, window);
}

inline void write_trace(std::ostream& out, const std::vector<TimedItem>& items) {
    out << "arrival_tick,timestamp,item_id\n";
    for (const auto& it : items) out << it.arrival << ',' << it.timestamp << ',' << it.item << '\n';
}

inline void write_message_log(std::ostream& out, const std::vector<LoggedMessage>& log) {
    out << "tick,stream_id,kind,item_id,value,words\n";
    for (const auto& [tick, m] : log) {
        out << tick << ',' << m.stream << ',' << to_string(m.kind) << ',';
        if (m.is_item()) out << m.item;
        out << ',';
        if (m.kind == MessageKind::quantile_grid) {
            for (std::size_t i = 0; i < m.grid.size(); ++i) out << (i ? ";" : "") << m.grid[i];
        } else {
            out << m.value;
        }
        out << ',' << m.words() << '\n';
    }
}

inline std::vector<LoggedMessage> read_message_log(std::istream& in, const std::string& source = "messages") {
    std::vector<LoggedMessage> out;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        throw InputError(source + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        if (lineno == 1 && row.starts_with("tick")) continue;
        const auto cells = split(row);
        if (cells.size() != 6) fail("expected 6 columns");
        LoggedMessage lm;
        if (!parse_number(cells[0], lm.tick) || !parse_number(cells[1], lm.msg.stream)) fail("bad tick or stream");
        try {
            lm.msg.kind = parse_message_kind(std::string(trim(cells[2])));
        } catch (const InputError& e) {
            fail(e.what());
        }
        if (lm.msg.is_item() && !parse_number(cells[3], lm.msg.item)) fail("bad item id");
        if (lm.msg.kind == MessageKind::quantile_grid) {
            for (auto v : split(trim(cells[4]), ';')) {
                ItemId j = 0;
                if (!parse_number(v, j)) fail("bad grid value");
                lm.msg.grid.push_back(j);
            }
        } else if (!parse_number(cells[4], lm.msg.value)) {
            fail("bad value");
        }
        Count words = 0;
        if (!parse_number(cells[5], words) || words != lm.msg.words()) fail("word count mismatch");
        out.push_back(std::move(lm));
    }
    return out;
}

inline void write_audits(std::ostream& out, const RunReport& r) {
    out << "tick,query,phi,true_value,root_value,allowed_err,abs_err,pass\n";
    for (const auto& a : r.audits) {
        out << a.tick << ',' << a.query << ',' << format_double(a.phi) << ',' << format_double(a.true_value)
            << ',' << format_double(a.root_value) << ',' << format_double(a.allowed_err) << ','
            << format_double(a.abs_err) << ',' << (a.pass ? 1 : 0) << '\n';
    }
}

inline void write_costs(std::ostream& out, const RunReport& r) {
    out << "window_anchor,stream_id,words,bits\n";
    const auto n = static_cast<std::size_t>(std::max<Tick>(r.ticks(), 0));
    const auto w = static_cast<std::size_t>(r.window.length);
    std::vector<Count> running(r.streams(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        Count total = 0;
        const Tick anchor = r.first_tick + static_cast<Tick>(i);
        for (std::size_t s = 0; s < r.streams(); ++s) {
            running[s] += r.words_per_tick[s][i];
            if (i >= w) running[s] -= r.words_per_tick[s][i - w];
            total += running[s];
        }
        if (total == 0) continue;
        for (std::size_t s = 0; s < r.streams(); ++s)
            out << anchor << ',' << s << ',' << running[s] << ',' << running[s] * r.word_size_bits << '\n';
        out << anchor << ",total," << total << ',' << total * r.word_size_bits << '\n';
    }
}

}  // namespace slidemon::csv
