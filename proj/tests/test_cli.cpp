#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "vre/metrics.hpp"
#include "vre/util.hpp"

using namespace vre;

namespace {

struct CmdResult {
    int code = -1;
    std::string output;
};

CmdResult run_cli(const std::string& args) {
    const char* bin = std::getenv("VRE_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult result;
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof(buffer), pipe)) {
        result.output.append(buffer, n);
    }
    const int rc = pclose(pipe);
    result.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return result;
}

struct Workspace {
    std::filesystem::path dir;
    Workspace() {
        dir = std::filesystem::temp_directory_path() /
              ("vre-cli-test-" + std::to_string(::getpid()));
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
    }
    ~Workspace() { std::filesystem::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("cli end to end") {
    Workspace ws;

    SUBCASE("usage errors exit 1") {
        CHECK(run_cli("").code == 1);
        CHECK(run_cli("loadtest --scenario 9 --out " + ws.path("x")).code == 1);
        CHECK(run_cli("frobnicate").code == 1);
    }

    SUBCASE("seed, dump, and the non-empty guard") {
        const std::string data = ws.path("data");
        auto seeded = run_cli("seed --backend document --data-dir " + data);
        CHECK(seeded.code == 0);
        CHECK(seeded.output.find("seeded") != std::string::npos);

        auto again = run_cli("seed --backend document --data-dir " + data);
        CHECK(again.code == 2);
        CHECK(again.output.find("not empty") != std::string::npos);
        CHECK(run_cli("seed --backend document --data-dir " + data + " --force").code == 0);

        auto dump = run_cli("dump --backend document --data-dir " + data +
                            " --collection Accounts");
        CHECK(dump.code == 0);
        // 1 admin + 10 clinicians + 150 patients.
        std::size_t lines = 0;
        for (char c : dump.output) lines += c == '\n';
        CHECK(lines == 161);
        CHECK(dump.output.find("\"username\":\"admin\"") != std::string::npos);
        CHECK(dump.output.find("password_hash") != std::string::npos);  // raw documents

        // Normalized backend: internal child tables are visible to dump.
        const std::string norm = ws.path("norm");
        CHECK(run_cli("seed --backend normalized --data-dir " + norm).code == 0);
        auto raw = run_cli("dump --backend normalized --data-dir " + norm +
                           " --raw-table content_video");
        CHECK(raw.code == 0);
        CHECK(raw.output.find("content_id") != std::string::npos);
    }

    SUBCASE("loadtest writes artifacts and report/compare consume them") {
        const std::string scenario_file = ws.path("scenario.json");
        util::write_file(scenario_file,
                         json{{"id", "cli-smoke"},
                              {"users", 2},
                              {"iterations", 1},
                              {"mode", "NoRefresh"},
                              {"population", json::array({json{{"script", "Goal100"},
                                                               {"percent", 100}}})}}
                             .dump());
        const std::string out = ws.path("out");
        auto load = run_cli("loadtest --scenario-file " + scenario_file +
                            " --backend document --shell-bytes 10000 --out " + out);
        CHECK(load.code == 0);
        CHECK(load.output.find("Total requests\t206") != std::string::npos);
        CHECK(std::filesystem::exists(out + "/run.log"));
        CHECK(std::filesystem::exists(out + "/stats.txt"));
        CHECK(std::filesystem::exists(out + "/stats.csv"));
        CHECK(std::filesystem::exists(out + "/stats.json"));
        CHECK(std::filesystem::exists(out + "/server-access.log"));

        // report reproduces the same table from the log alone.
        const std::string report_out = ws.path("report");
        auto report = run_cli("report --log " + out + "/run.log --out " + report_out);
        CHECK(report.code == 0);
        auto a = util::read_file(out + "/stats.csv");
        auto b = util::read_file(report_out + "/stats.csv");
        REQUIRE(a.has_value());
        REQUIRE(b.has_value());
        CHECK(*a == *b);

        // compare of a run with itself is +0% on every row.
        const std::string cmp_out = ws.path("cmp-self");
        auto cmp = run_cli("compare --a " + out + "/stats.json --b " + out + "/stats.json --out " +
                           cmp_out);
        CHECK(cmp.code == 0);
        std::size_t zero_rows = 0;
        std::size_t pos = 0;
        while ((pos = cmp.output.find("+0%", pos)) != std::string::npos) {
            ++zero_rows;
            pos += 3;
        }
        CHECK(zero_rows == 14);
    }

    SUBCASE("compare reproduces the published percent column from fixtures") {
        // Scenario 1 columns as stats fixtures.
        metrics::StatsTable sql;
        sql.avg_pages_per_sec = 12.4;
        sql.avg_requests_per_sec = 19.0;
        sql.total_pages = 2040;
        sql.total_requests = 3110;
        sql.avg_request_response_time_sec = 0.456;
        sql.avg_page_response_time_sec = 0.691;
        sql.total_throughput_mb = 13.52;
        sql.avg_throughput_mbps = 0.66;
        sql.users_launched = 10;
        sql.iterations_completed = 10;
        metrics::StatsTable mean = sql;
        mean.avg_pages_per_sec = 5.3;
        mean.avg_requests_per_sec = 27.0;
        mean.total_pages = 16220;
        mean.total_requests = 82980;
        mean.avg_request_response_time_sec = 0.605;
        mean.avg_page_response_time_sec = 1.89;
        mean.total_throughput_mb = 99.89;
        mean.avg_throughput_mbps = 0.26;

        const std::string a = ws.path("sql.json");
        const std::string b = ws.path("mean.json");
        util::write_file(a, metrics::stats_to_json(sql).dump());
        util::write_file(b, metrics::stats_to_json(mean).dump());
        auto cmp = run_cli("compare --a " + a + " --b " + b + " --out " + ws.path("cmp"));
        CHECK(cmp.code == 0);
        CHECK(cmp.output.find("+42.1%") != std::string::npos);
        CHECK(cmp.output.find("-57.3%") != std::string::npos);
        CHECK(cmp.output.find("-60.6%") != std::string::npos);

        // Mismatched schema versions refuse to compare.
        json old_schema = metrics::stats_to_json(sql);
        old_schema["schema_version"] = 0;
        const std::string stale = ws.path("stale.json");
        util::write_file(stale, old_schema.dump());
        auto mismatch = run_cli("compare --a " + a + " --b " + stale + " --out " + ws.path("cmp2"));
        CHECK(mismatch.code == 2);
        CHECK(mismatch.output.find("SchemaMismatch") != std::string::npos);
    }

    SUBCASE("shardsim demo passes its own checks") {
        auto sim = run_cli("shardsim --records 2000 --queries 40 --out " + ws.path("shard"));
        CHECK(sim.code == 0);
        CHECK(sim.output.find("[ok]") != std::string::npos);
        CHECK(sim.output.find("[FAIL]") == std::string::npos);
        CHECK(std::filesystem::exists(ws.path("shard") + "/shardsim.json"));
    }

    SUBCASE("serve runs headless for a bounded time") {
        auto serve = run_cli("serve --backend document --data-dir " + ws.path("serve-data") +
                             " --port 0 --for-seconds 1");
        CHECK(serve.code == 0);
        CHECK(serve.output.find("listening on http://127.0.0.1:") != std::string::npos);
    }
}
