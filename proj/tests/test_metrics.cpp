#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "vre/metrics.hpp"

using namespace vre;
using metrics::StatsTable;

namespace {

/// Published results used as arithmetic oracles: totals in, printed rates
/// out. Durations come from the written run times; run 2B's printed rates
/// imply 33 s against the prose "32 seconds" (whole-second rounding).
struct PublishedRun {
    const char* name;
    double pages, requests, mb, duration_sec;
    double printed_pages_per_sec, printed_requests_per_sec, printed_mbps;
};

constexpr PublishedRun kPublishedRuns[] = {
    {"1A", 2040, 3110, 13.52, 163, 12.4, 19.0, 0.66},
    {"1B", 16220, 82980, 99.89, 3077, 5.3, 27.0, 0.26},
    {"2A", 3070, 4956, 422.06, 512, 6.0, 9.7, 6.58},
    {"2B", 1290, 3070, 1.07, 33, 39.1, 93.0, 0.26},
    {"3A", 3034, 6860, 899.8, 2621, 1.2, 2.6, 2.75},
    {"3B", 15555, 25354, 19.98, 1376, 11.3, 18.4, 0.12},
    {"5A", 3050, 5767, 915.54, 2622, 1.2, 2.2, 2.79},
    {"5B", 9215, 15450, 15.8, 836, 11.0, 18.5, 0.15},
};

StatsTable from_published(const PublishedRun& run) {
    metrics::RunTotals totals;
    totals.pages = static_cast<std::uint64_t>(run.pages);
    totals.requests = static_cast<std::uint64_t>(run.requests);
    totals.bytes_total = run.mb * 1e6;
    totals.duration_sec = run.duration_sec;
    return metrics::stats_from_totals(totals);
}

}  // namespace

TEST_CASE("rate formulas reproduce the published numbers") {
    // The headline cases first, at their own tolerances.
    {
        metrics::RunTotals t;
        t.bytes_total = 13.52e6;
        t.duration_sec = 163;
        CHECK(std::abs(metrics::stats_from_totals(t).avg_throughput_mbps - 0.66) < 0.01);
    }
    {
        metrics::RunTotals t;
        t.requests = 4956;
        t.request_errors = 226;
        t.duration_sec = 512;
        CHECK(std::abs(metrics::stats_from_totals(t).error_rate_percent - 4.6) < 0.05);
    }
    {
        metrics::RunTotals t;
        t.pages = 15555;
        t.duration_sec = 1376;
        CHECK(std::abs(metrics::stats_from_totals(t).avg_pages_per_sec - 11.3) < 0.1);
    }
    {
        metrics::RunTotals t;
        t.pages = 9215;
        t.duration_sec = 836;
        CHECK(std::abs(metrics::stats_from_totals(t).avg_pages_per_sec - 11.0) < 0.1);
    }
    // And every published run within +-0.15 absolute.
    for (const auto& run : kPublishedRuns) {
        CAPTURE(run.name);
        StatsTable stats = from_published(run);
        CHECK(std::abs(stats.avg_pages_per_sec - run.printed_pages_per_sec) < 0.15);
        CHECK(std::abs(stats.avg_requests_per_sec - run.printed_requests_per_sec) < 0.15);
        CHECK(std::abs(stats.avg_throughput_mbps - run.printed_mbps) < 0.15);
    }
}

TEST_CASE("percent differences reproduce the published comparison cells") {
    struct Cell {
        double a, b, printed;
    };
    // Run 1 and run 2 tables, every row with a defined percentage.
    const Cell cells[] = {
        {12.4, 5.3, -57.3},  {19.0, 27.0, 42.1},   {2040, 16220, 695},  {3110, 82980, 2568},
        {0.456, 0.605, 32.7}, {0.691, 1.89, 174},   {13.52, 99.89, 639}, {0.66, 0.26, -60.6},
        {6.0, 39.1, 552},     {9.7, 93.0, 859},     {3070, 1290, -58},   {4956, 3070, -38.1},
        {1.03, 0.15, -85.4},  {226, 0, -100},       {4.6, 0, -100},      {1.65, 0.181, -89},
        {422.06, 1.07, -99.7}, {6.58, 0.26, -96},   {5.5, 0, -100},
    };
    for (const auto& cell : cells) {
        CAPTURE(cell.a);
        CAPTURE(cell.b);
        auto p = metrics::percent_diff(cell.a, cell.b);
        REQUIRE(p.has_value());
        CHECK(std::abs(*p - cell.printed) < 0.5);
    }
}

TEST_CASE("percent diff edge cases") {
    auto zero = metrics::percent_diff(10, 10);
    REQUIRE(zero.has_value());
    CHECK(*zero == 0.0);
    CHECK(metrics::format_percent(zero) == "+0%");

    auto both_zero = metrics::percent_diff(0, 0);
    REQUIRE(both_zero.has_value());
    CHECK(*both_zero == 0.0);

    CHECK_FALSE(metrics::percent_diff(0, 5).has_value());
    CHECK(metrics::format_percent(metrics::percent_diff(0, 5)) == "n/a");

    CHECK(metrics::format_percent(metrics::percent_diff(19.0, 27.0)) == "+42.1%");
    CHECK(metrics::format_percent(metrics::percent_diff(12.4, 5.3)) == "-57.3%");
    CHECK(metrics::format_percent(metrics::percent_diff(2040, 16220)) == "+695%");
}

TEST_CASE("compare reciprocity: (1 + dAB/100)(1 + dBA/100) == 1") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(0.1, 5000.0);
    for (int i = 0; i < 200; ++i) {
        const double a = dist(rng);
        const double b = dist(rng);
        auto ab = metrics::percent_diff(a, b);
        auto ba = metrics::percent_diff(b, a);
        REQUIRE(ab.has_value());
        REQUIRE(ba.has_value());
        CHECK((1.0 + *ab / 100.0) * (1.0 + *ba / 100.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("comparison table covers all fourteen rows in order") {
    StatsTable a;
    a.avg_pages_per_sec = 12.4;
    a.avg_requests_per_sec = 19.0;
    StatsTable b;
    b.avg_pages_per_sec = 5.3;
    b.avg_requests_per_sec = 27.0;
    auto table = metrics::compare(a, b);
    REQUIRE(table.rows.size() == 14);
    CHECK(table.rows[0].label == "Average pages/s");
    CHECK(table.rows[1].label == "Average requests/s");
    CHECK(metrics::format_percent(table.rows[1].percent) == "+42.1%");
    CHECK(metrics::format_percent(table.rows[10].percent) == "+0%");  // users 0 vs 0

    auto text = metrics::render_text(table);
    CHECK(text.find("+42.1%") != std::string::npos);
    CHECK(text.find("-57.3%") != std::string::npos);
}

TEST_CASE("identical stats compare to +0% everywhere") {
    StatsTable s = from_published(kPublishedRuns[0]);
    auto table = metrics::compare(s, s);
    for (const auto& row : table.rows) {
        CHECK(metrics::format_percent(row.percent) == "+0%");
    }
}

TEST_CASE("time decomposition matches the worked example exactly") {
    CHECK(metrics::client_time_ms(14.701, 9.482) == 5.219);
    CHECK(metrics::client_time_ms(10.0, 10.0) == 0.0);  // loopback lower bound

    std::vector<loadgen::RunEvent> client(1);
    client[0].kind = "request";
    client[0].method = "POST";
    client[0].path = "/api/treatment";
    client[0].label = "Create treatment";
    client[0].elapsed_ms = 14.701;
    std::vector<metrics::ServerSample> server = {{"POST", "/api/treatment", 9.482}};
    auto table = metrics::decompose(client, server);
    REQUIRE(table.requests.size() == 1);
    CHECK(table.requests[0].client_ms == 5.219);
    CHECK(table.requests[0].server_ms == 9.482);
    CHECK(table.unmatched.empty());
    REQUIRE(table.by_operation.size() == 1);
    CHECK(table.by_operation[0].label == "Create treatment");

    auto text = metrics::render_text(table);
    CHECK(text.find("Client time (ms)") != std::string::npos);
}

TEST_CASE("decomposition matches by method+path+ordinal and lists unmatched") {
    std::vector<loadgen::RunEvent> client(3);
    for (int i = 0; i < 3; ++i) {
        client[i].kind = "request";
        client[i].method = "PUT";
        client[i].path = "/api/goal/1";
        client[i].label = "Update goal";
        client[i].start_ms = i;
        client[i].elapsed_ms = 10.0 + i;
    }
    std::vector<metrics::ServerSample> server = {{"PUT", "/api/goal/1", 4.0},
                                                 {"PUT", "/api/goal/1", 5.0}};
    auto table = metrics::decompose(client, server);
    CHECK(table.requests.size() == 2);
    CHECK(table.requests[0].server_ms == 4.0);
    CHECK(table.requests[1].server_ms == 5.0);
    REQUIRE(table.unmatched.size() == 1);
    CHECK(table.unmatched[0] == "PUT /api/goal/1");
    // Aggregates exclude the unmatched request.
    CHECK(table.by_operation[0].count == 2);
}

TEST_CASE("compute_stats is a pure function of the log") {
    loadgen::RawRunLog log;
    log.users_launched = 2;
    log.iterations_completed = 2;
    log.duration_ms = 2000;
    for (int i = 0; i < 10; ++i) {
        loadgen::RunEvent e;
        e.kind = "request";
        e.user = i % 2;
        e.method = "GET";
        e.path = "/api/goal";
        e.status = i == 3 ? 500 : 200;
        e.error = i == 3;
        e.bytes_down = 1000;
        e.bytes_up = 100;
        e.start_ms = i * 100;
        e.end_ms = i * 100 + 50;
        e.elapsed_ms = 50;
        log.events.push_back(e);
    }
    loadgen::RunEvent page;
    page.kind = "page";
    page.elapsed_ms = 120;
    page.end_ms = 1200;
    page.requests_in_page = 5;
    log.events.push_back(page);

    auto a = metrics::compute_stats(log);
    auto b = metrics::compute_stats(log);
    CHECK(metrics::render_text(a) == metrics::render_text(b));
    CHECK(metrics::render_csv(a) == metrics::render_csv(b));

    CHECK(a.total_requests == 10);
    CHECK(a.total_pages == 1);
    CHECK(a.total_request_errors == 1);
    CHECK(a.error_rate_percent == doctest::Approx(10.0));
    CHECK(a.avg_requests_per_sec == doctest::Approx(5.0));
    CHECK(a.avg_pages_per_sec == doctest::Approx(0.5));
    CHECK(a.total_throughput_mb == doctest::Approx(0.011));
    CHECK(a.avg_throughput_mbps == doctest::Approx(0.011 * 8 / 2));
    CHECK(a.avg_request_response_time_sec == doctest::Approx(0.05));
    CHECK(a.avg_page_response_time_sec == doctest::Approx(0.12));
}

TEST_CASE("empty log renders an all-zero table without error") {
    loadgen::RawRunLog log;
    auto stats = metrics::compute_stats(log);
    CHECK(stats.total_requests == 0);
    CHECK(stats.error_rate_percent == 0);
    auto text = metrics::render_text(stats);
    CHECK(text.find("Total requests\t0") != std::string::npos);
    auto csv = metrics::render_csv(stats);
    auto parsed = metrics::stats_from_csv(csv);
    REQUIRE(parsed.has_value());
}

TEST_CASE("csv round-trips to equal values") {
    StatsTable s = from_published(kPublishedRuns[2]);
    s.users_launched = 10;
    s.iterations_completed = 10;
    s.total_request_errors = 226;
    s.error_rate_percent = 4.560129136400323;
    auto csv = metrics::render_csv(s);
    CHECK(csv.substr(0, csv.find(',')) == "Average pages/s");
    auto parsed = metrics::stats_from_csv(csv);
    REQUIRE(parsed.has_value());
    for (std::size_t row = 0; row < 14; ++row) {
        CHECK(metrics::stat_value(*parsed, row) == metrics::stat_value(s, row));
    }
}

TEST_CASE("json stats round-trip and schema guard") {
    StatsTable s = from_published(kPublishedRuns[1]);
    auto j = metrics::stats_to_json(s);
    auto parsed = metrics::stats_from_json(j);
    REQUIRE(parsed.has_value());
    CHECK(parsed->schema_version == metrics::kStatsSchemaVersion);
    for (std::size_t row = 0; row < 14; ++row) {
        CHECK(metrics::stat_value(*parsed, row) == metrics::stat_value(s, row));
    }
    CHECK_FALSE(metrics::stats_from_json(json{{"bogus", 1}}).has_value());
}

TEST_CASE("alerts fire on slow trailing-window response times") {
    loadgen::RawRunLog log;
    log.duration_ms = 10000;
    // Seconds 0-4: fast requests. Seconds 5-9: 2-second responses.
    for (int i = 0; i < 10; ++i) {
        loadgen::RunEvent e;
        e.kind = "request";
        e.elapsed_ms = i < 5 ? 20 : 2000;
        e.end_ms = i * 1000 + 500;
        e.start_ms = e.end_ms - e.elapsed_ms;
        log.events.push_back(e);
    }
    auto stats = metrics::compute_stats(log);
    CHECK(stats.alerts_total_duration_percent > 0);
    CHECK(stats.alerts_total_duration_percent <= 100);

    // The same events spread fast never alert.
    for (auto& e : log.events) e.elapsed_ms = 10;
    CHECK(metrics::compute_stats(log).alerts_total_duration_percent == 0);

    // A CPU sample above the threshold alerts too.
    loadgen::RawRunLog cpu_log;
    cpu_log.duration_ms = 4000;
    loadgen::RunEvent fast;
    fast.kind = "request";
    fast.elapsed_ms = 5;
    fast.end_ms = 100;
    cpu_log.events.push_back(fast);
    cpu_log.samples.push_back({1500.0, 95.0, 50.0});
    CHECK(metrics::compute_stats(cpu_log).alerts_total_duration_percent > 0);
}
