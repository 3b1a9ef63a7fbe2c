#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vre/loadgen.hpp"

namespace vre::metrics {

inline constexpr int kStatsSchemaVersion = 1;

/// The fourteen-row results table of one run. Units are decimal:
/// MB = 10^6 bytes, Mb/s = 10^6 bits per second.
struct StatsTable {
    double avg_pages_per_sec = 0;
    double avg_requests_per_sec = 0;
    std::uint64_t total_pages = 0;
    std::uint64_t total_requests = 0;
    double avg_request_response_time_sec = 0;
    std::uint64_t total_request_errors = 0;
    double error_rate_percent = 0;
    double avg_page_response_time_sec = 0;
    double total_throughput_mb = 0;
    double avg_throughput_mbps = 0;
    std::uint64_t users_launched = 0;
    std::uint64_t iterations_completed = 0;
    std::uint64_t action_errors = 0;
    double alerts_total_duration_percent = 0;
    int schema_version = kStatsSchemaVersion;
};

/// The row labels, in table order.
const std::vector<std::string>& stat_labels();
/// Numeric value of a row by index (table order).
double stat_value(const StatsTable& stats, std::size_t row);

/// Raw totals; the rate fields of StatsTable are pure functions of these.
struct RunTotals {
    std::uint64_t pages = 0;
    std::uint64_t requests = 0;
    std::uint64_t request_errors = 0;
    double sum_request_ms = 0;
    double sum_page_ms = 0;
    double bytes_total = 0;  // up + down
    std::uint64_t users = 0;
    std::uint64_t iterations = 0;
    std::uint64_t action_errors = 0;
    double duration_sec = 0;
    double alerts_percent = 0;
};

StatsTable stats_from_totals(const RunTotals& totals);

/// Alert rule: a second of run time is "alerting" when the trailing-window
/// average request response time or a CPU sample breaches its threshold.
struct AlertConfig {
    double trailing_window_sec = 5.0;
    double response_time_threshold_sec = 1.5;
    double cpu_threshold_percent = 90.0;
};

/// Pure function of the log: identical logs give identical tables.
StatsTable compute_stats(const loadgen::RawRunLog& log, const AlertConfig& alerts = {});

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
    std::string label;
    double a = 0;
    double b = 0;
    std::optional<double> percent;  // nullopt = n/a (a == 0, b != 0)
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    int schema_version = kStatsSchemaVersion;
};

/// (b - a) / a * 100; +0 when both zero; n/a when only a is zero.
std::optional<double> percent_diff(double a, double b);
ComparisonTable compare(const StatsTable& a, const StatsTable& b);

/// "+42.1%", "-57.3%", "+695%" (one decimal below 100, none above), "n/a".
std::string format_percent(const std::optional<double>& percent);

// ---------------------------------------------------------------------------
// Time decomposition
// ---------------------------------------------------------------------------

struct DecomposedRequest {
    std::string label;
    std::string method;
    std::string path;
    double total_ms = 0;
    double server_ms = 0;
    double client_ms = 0;  // total - server, rounded to microseconds
    double ttfb_ms = 0;
};

struct OperationTiming {
    std::string label;
    int count = 0;
    double avg_total_ms = 0;
    double avg_client_ms = 0;
    double avg_server_ms = 0;
};

struct DecompositionTable {
    std::vector<DecomposedRequest> requests;
    std::vector<OperationTiming> by_operation;
    std::vector<std::string> unmatched;  // listed, excluded from aggregates
};

double client_time_ms(double total_ms, double server_ms);

/// Matches client request events to server access-log lines by
/// (method, path, ordinal) and splits each total into client/server shares.
struct ServerSample {
    std::string method;
    std::string path;
    double elapsed_ms = 0;
};

DecompositionTable decompose(const std::vector<loadgen::RunEvent>& client_events,
                             const std::vector<ServerSample>& server_log);

// ---------------------------------------------------------------------------
// Rendering and files
// ---------------------------------------------------------------------------

std::string render_text(const StatsTable& stats);
std::string render_csv(const StatsTable& stats);
json stats_to_json(const StatsTable& stats);
std::optional<StatsTable> stats_from_json(const json& j);
std::optional<StatsTable> stats_from_csv(const std::string& csv);

std::string render_text(const ComparisonTable& table);
std::string render_csv(const ComparisonTable& table);
json comparison_to_json(const ComparisonTable& table);

std::string render_text(const DecompositionTable& table);

}  // namespace vre::metrics
