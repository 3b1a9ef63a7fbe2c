#include "vre/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "vre/util.hpp"

namespace vre::metrics {

namespace {

enum class Style { Rate, Integer, TimeSec, MegaBytes, MegabitsPerSec, Percent, AlertPercent };

struct RowDef {
    const char* label;
    double (*get)(const StatsTable&);
    Style style;
};

constexpr RowDef kRows[] = {
    {"Average pages/s", [](const StatsTable& s) { return s.avg_pages_per_sec; }, Style::Rate},
    {"Average requests/s", [](const StatsTable& s) { return s.avg_requests_per_sec; }, Style::Rate},
    {"Total pages", [](const StatsTable& s) { return double(s.total_pages); }, Style::Integer},
    {"Total requests", [](const StatsTable& s) { return double(s.total_requests); }, Style::Integer},
    {"Average Request response time",
     [](const StatsTable& s) { return s.avg_request_response_time_sec; }, Style::TimeSec},
    {"Total request errors", [](const StatsTable& s) { return double(s.total_request_errors); },
     Style::Integer},
    {"Error rate", [](const StatsTable& s) { return s.error_rate_percent; }, Style::Percent},
    {"Average Page response time",
     [](const StatsTable& s) { return s.avg_page_response_time_sec; }, Style::TimeSec},
    {"Total throughput", [](const StatsTable& s) { return s.total_throughput_mb; },
     Style::MegaBytes},
    {"Average throughput", [](const StatsTable& s) { return s.avg_throughput_mbps; },
     Style::MegabitsPerSec},
    {"Total users launched", [](const StatsTable& s) { return double(s.users_launched); },
     Style::Integer},
    {"Total iterations completed",
     [](const StatsTable& s) { return double(s.iterations_completed); }, Style::Integer},
    {"Total action errors", [](const StatsTable& s) { return double(s.action_errors); },
     Style::Integer},
    {"Alerts total duration",
     [](const StatsTable& s) { return s.alerts_total_duration_percent; }, Style::AlertPercent},
};

constexpr std::size_t kRowCount = std::size(kRows);

std::string format_value(double value, Style style) {
    switch (style) {
        case Style::Rate: return util::format_double(value, 1);
        case Style::Integer: return std::to_string(static_cast<long long>(std::llround(value)));
        case Style::TimeSec: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3g s", value);
            return buf;
        }
        case Style::MegaBytes: return util::format_double(value, 2) + " MB";
        case Style::MegabitsPerSec: return util::format_double(value, 2) + " Mb/s";
        case Style::Percent: return util::format_double(value, 1);
        case Style::AlertPercent: return util::format_double(value, 1) + " %";
    }
    return util::format_double(value, 3);
}

std::string format_plain(double value) {
    if (value == std::floor(value) && std::abs(value) < 1e15) {
        return std::to_string(static_cast<long long>(value));
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

std::string format_exact(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

const std::vector<std::string>& stat_labels() {
    static const std::vector<std::string> labels = [] {
        std::vector<std::string> out;
        for (const auto& row : kRows) out.emplace_back(row.label);
        return out;
    }();
    return labels;
}

double stat_value(const StatsTable& stats, std::size_t row) {
    if (row >= kRowCount) return 0;
    return kRows[row].get(stats);
}

StatsTable stats_from_totals(const RunTotals& t) {
    StatsTable s;
    const double duration = t.duration_sec;
    s.total_pages = t.pages;
    s.total_requests = t.requests;
    s.total_request_errors = t.request_errors;
    s.users_launched = t.users;
    s.iterations_completed = t.iterations;
    s.action_errors = t.action_errors;
    s.total_throughput_mb = t.bytes_total / 1e6;
    s.alerts_total_duration_percent = t.alerts_percent;
    if (duration > 0) {
        s.avg_pages_per_sec = double(t.pages) / duration;
        s.avg_requests_per_sec = double(t.requests) / duration;
        s.avg_throughput_mbps = s.total_throughput_mb * 8.0 / duration;
    }
    if (t.requests > 0) {
        s.avg_request_response_time_sec = t.sum_request_ms / double(t.requests) / 1000.0;
        s.error_rate_percent = double(t.request_errors) / double(t.requests) * 100.0;
    }
    if (t.pages > 0) s.avg_page_response_time_sec = t.sum_page_ms / double(t.pages) / 1000.0;
    return s;
}

namespace {

double alerts_percent(const loadgen::RawRunLog& log, const AlertConfig& alerts) {
    const double duration_sec = log.duration_ms / 1000.0;
    if (duration_sec <= 0) return 0;
    const int seconds = static_cast<int>(std::ceil(duration_sec));
    int breached = 0;
    for (int s = 0; s < seconds; ++s) {
        const double window_end = (s + 1) * 1000.0;
        const double window_start = window_end - alerts.trailing_window_sec * 1000.0;
        double sum = 0;
        int count = 0;
        for (const auto& event : log.events) {
            if (event.kind != "request") continue;
            if (event.end_ms >= window_start && event.end_ms < window_end) {
                sum += event.elapsed_ms;
                ++count;
            }
        }
        bool breach = count > 0 && (sum / count) / 1000.0 > alerts.response_time_threshold_sec;
        if (!breach) {
            for (const auto& sample : log.samples) {
                if (sample.t_ms >= window_start && sample.t_ms < window_end &&
                    sample.cpu_percent > alerts.cpu_threshold_percent) {
                    breach = true;
                    break;
                }
            }
        }
        if (breach) ++breached;
    }
    return 100.0 * double(breached) / double(seconds);
}

}  // namespace

StatsTable compute_stats(const loadgen::RawRunLog& log, const AlertConfig& alerts) {
    RunTotals t;
    double last_end = 0;
    for (const auto& event : log.events) {
        last_end = std::max(last_end, event.end_ms);
        if (event.kind == "page") {
            ++t.pages;
            t.sum_page_ms += event.elapsed_ms;
        } else if (event.kind == "request") {
            ++t.requests;
            t.sum_request_ms += event.elapsed_ms;
            t.bytes_total += double(event.bytes_down) + double(event.bytes_up);
            if (event.error) ++t.request_errors;
        }
    }
    t.users = static_cast<std::uint64_t>(log.users_launched);
    t.iterations = static_cast<std::uint64_t>(log.iterations_completed);
    t.action_errors = static_cast<std::uint64_t>(log.action_errors);
    t.duration_sec = (log.duration_ms > 0 ? log.duration_ms : last_end) / 1000.0;
    t.alerts_percent = alerts_percent(log, alerts);
    return stats_from_totals(t);
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

std::optional<double> percent_diff(double a, double b) {
    if (a == 0) {
        if (b == 0) return 0.0;
        return std::nullopt;
    }
    return (b - a) / a * 100.0;
}

ComparisonTable compare(const StatsTable& a, const StatsTable& b) {
    ComparisonTable table;
    for (std::size_t row = 0; row < kRowCount; ++row) {
        ComparisonRow r;
        r.label = kRows[row].label;
        r.a = stat_value(a, row);
        r.b = stat_value(b, row);
        r.percent = percent_diff(r.a, r.b);
        table.rows.push_back(std::move(r));
    }
    return table;
}

std::string format_percent(const std::optional<double>& percent) {
    if (!percent) return "n/a";
    const double p = *percent;
    if (std::llround(std::abs(p) * 10) == 0) return "+0%";
    const int decimals = std::abs(p) >= 100.0 ? 0 : 1;
    return (p < 0 ? "-" : "+") + util::format_double(std::abs(p), decimals) + "%";
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

double client_time_ms(double total_ms, double server_ms) {
    return std::round((total_ms - server_ms) * 1000.0) / 1000.0;
}

DecompositionTable decompose(const std::vector<loadgen::RunEvent>& client_events,
                             const std::vector<ServerSample>& server_log) {
    DecompositionTable table;

    std::map<std::pair<std::string, std::string>, std::vector<double>> server_by_key;
    for (const auto& sample : server_log) {
        server_by_key[{sample.method, sample.path}].push_back(sample.elapsed_ms);
    }
    std::map<std::pair<std::string, std::string>, std::size_t> next_ordinal;

    std::vector<const loadgen::RunEvent*> requests;
    for (const auto& event : client_events) {
        if (event.kind == "request") requests.push_back(&event);
    }
    std::stable_sort(requests.begin(), requests.end(),
                     [](const auto* a, const auto* b) { return a->start_ms < b->start_ms; });

    for (const auto* event : requests) {
        const auto key = std::make_pair(event->method, event->path);
        auto it = server_by_key.find(key);
        std::size_t ordinal = next_ordinal[key];
        if (it == server_by_key.end() || ordinal >= it->second.size()) {
            table.unmatched.push_back(event->method + " " + event->path);
            continue;
        }
        ++next_ordinal[key];
        DecomposedRequest row;
        row.label = event->label;
        row.method = event->method;
        row.path = event->path;
        row.total_ms = event->elapsed_ms;
        row.server_ms = it->second[ordinal];
        row.client_ms = client_time_ms(row.total_ms, row.server_ms);
        row.ttfb_ms = event->ttfb_ms;
        table.requests.push_back(std::move(row));
    }

    std::map<std::string, OperationTiming> ops;
    for (const auto& row : table.requests) {
        auto& op = ops[row.label];
        op.label = row.label;
        ++op.count;
        op.avg_total_ms += row.total_ms;
        op.avg_client_ms += row.client_ms;
        op.avg_server_ms += row.server_ms;
    }
    for (auto& [label, op] : ops) {
        op.avg_total_ms /= op.count;
        op.avg_client_ms /= op.count;
        op.avg_server_ms /= op.count;
        table.by_operation.push_back(op);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render_text(const StatsTable& stats) {
    std::ostringstream out;
    for (std::size_t row = 0; row < kRowCount; ++row) {
        out << kRows[row].label << '\t' << format_value(stat_value(stats, row), kRows[row].style)
            << '\n';
    }
    return out.str();
}

std::string render_csv(const StatsTable& stats) {
    std::ostringstream out;
    for (std::size_t row = 0; row < kRowCount; ++row) {
        if (row > 0) out << ',';
        out << kRows[row].label;
    }
    out << '\n';
    for (std::size_t row = 0; row < kRowCount; ++row) {
        if (row > 0) out << ',';
        out << format_exact(stat_value(stats, row));
    }
    out << '\n';
    return out.str();
}

namespace {

constexpr const char* kJsonKeys[] = {
    "avg_pages_per_sec",   "avg_requests_per_sec", "total_pages",
    "total_requests",      "avg_request_response_time_sec", "total_request_errors",
    "error_rate_percent",  "avg_page_response_time_sec",    "total_throughput_mb",
    "avg_throughput_mbps", "users_launched",       "iterations_completed",
    "action_errors",       "alerts_total_duration_percent",
};

void assign_row(StatsTable& s, std::size_t row, double value) {
    switch (row) {
        case 0: s.avg_pages_per_sec = value; break;
        case 1: s.avg_requests_per_sec = value; break;
        case 2: s.total_pages = static_cast<std::uint64_t>(std::llround(value)); break;
        case 3: s.total_requests = static_cast<std::uint64_t>(std::llround(value)); break;
        case 4: s.avg_request_response_time_sec = value; break;
        case 5: s.total_request_errors = static_cast<std::uint64_t>(std::llround(value)); break;
        case 6: s.error_rate_percent = value; break;
        case 7: s.avg_page_response_time_sec = value; break;
        case 8: s.total_throughput_mb = value; break;
        case 9: s.avg_throughput_mbps = value; break;
        case 10: s.users_launched = static_cast<std::uint64_t>(std::llround(value)); break;
        case 11: s.iterations_completed = static_cast<std::uint64_t>(std::llround(value)); break;
        case 12: s.action_errors = static_cast<std::uint64_t>(std::llround(value)); break;
        case 13: s.alerts_total_duration_percent = value; break;
        default: break;
    }
}

}  // namespace

json stats_to_json(const StatsTable& stats) {
    json values = json::object();
    for (std::size_t row = 0; row < kRowCount; ++row) {
        values[kJsonKeys[row]] = stat_value(stats, row);
    }
    return json{{"schema_version", stats.schema_version}, {"stats", values}};
}

std::optional<StatsTable> stats_from_json(const json& j) {
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("stats")) {
        return std::nullopt;
    }
    StatsTable s;
    s.schema_version = j["schema_version"].get<int>();
    const json& values = j["stats"];
    for (std::size_t row = 0; row < kRowCount; ++row) {
        if (!values.contains(kJsonKeys[row]) || !values[kJsonKeys[row]].is_number()) {
            return std::nullopt;
        }
        assign_row(s, row, values[kJsonKeys[row]].get<double>());
    }
    return s;
}

std::optional<StatsTable> stats_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string header_line, value_line;
    if (!std::getline(in, header_line) || !std::getline(in, value_line)) return std::nullopt;
    auto headers = util::split(util::trim(header_line), ',');
    auto values = util::split(util::trim(value_line), ',');
    if (headers.size() != kRowCount || values.size() != kRowCount) return std::nullopt;
    StatsTable s;
    for (std::size_t row = 0; row < kRowCount; ++row) {
        if (headers[row] != kRows[row].label) return std::nullopt;
        try {
            assign_row(s, row, std::stod(values[row]));
        } catch (...) {
            return std::nullopt;
        }
    }
    return s;
}

std::string render_text(const ComparisonTable& table) {
    std::ostringstream out;
    out << "Statistic\tA\tB\t%\n";
    for (const auto& row : table.rows) {
        out << row.label << '\t' << format_plain(row.a) << '\t' << format_plain(row.b) << '\t'
            << format_percent(row.percent) << '\n';
    }
    return out.str();
}

std::string render_csv(const ComparisonTable& table) {
    std::ostringstream out;
    out << "Statistic,A,B,%\n";
    for (const auto& row : table.rows) {
        out << row.label << ',' << format_exact(row.a) << ',' << format_exact(row.b) << ','
            << format_percent(row.percent) << '\n';
    }
    return out.str();
}

json comparison_to_json(const ComparisonTable& table) {
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r{{"label", row.label}, {"a", row.a}, {"b", row.b}};
        if (row.percent) {
            r["percent"] = *row.percent;
        } else {
            r["percent"] = nullptr;
        }
        rows.push_back(std::move(r));
    }
    return json{{"schema_version", table.schema_version}, {"rows", rows}};
}

std::string render_text(const DecompositionTable& table) {
    std::ostringstream out;
    out << "Operation\tTotal time (ms)\tClient time (ms)\tServer time (ms)\n";
    for (const auto& op : table.by_operation) {
        out << op.label << '\t' << util::format_double(op.avg_total_ms, 3) << '\t'
            << util::format_double(op.avg_client_ms, 3) << '\t'
            << util::format_double(op.avg_server_ms, 3) << '\n';
    }
    if (!table.unmatched.empty()) {
        out << "Unmatched requests (excluded): " << table.unmatched.size() << '\n';
    }
    return out.str();
}

}  // namespace vre::metrics
