// vre — serve the rehabilitation API, seed fixtures, replay benchmark
// scenarios, compute and compare result tables, and drive the shard-routing
// simulator. Exit codes: 0 success, 1 usage, 2 runtime failure.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <random>
#include <thread>

#include "vre/api_server.hpp"
#include "vre/config.hpp"
#include "vre/document_store.hpp"
#include "vre/equivalence.hpp"
#include "vre/loadgen.hpp"
#include "vre/metrics.hpp"
#include "vre/normalized_store.hpp"
#include "vre/seed.hpp"
#include "vre/shardsim.hpp"
#include "vre/util.hpp"
#include "vre/validate.hpp"

namespace {

using namespace vre;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int fail(const std::string& message, int code = kExitRuntime) {
    std::cerr << "vre: " << message << '\n';
    return code;
}

struct ConfigFlags {
    std::string config_file;
    std::string backend;
    std::string data_dir;
    std::string content_root;
    int port = -1;
    int flush_interval_ms = -1;
    std::string write_concern;
    std::string open_reads;
    std::int64_t shell_bytes = -1;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_file, "Config file (key = value lines)");
    cmd->add_option("--backend", flags.backend, "Storage backend: document | normalized");
    cmd->add_option("--data-dir", flags.data_dir, "Data directory");
    cmd->add_option("--content-root", flags.content_root, "Repository content root");
    cmd->add_option("--port", flags.port, "Listen port (0 = ephemeral)");
    cmd->add_option("--flush-interval-ms", flags.flush_interval_ms,
                    "Document backend flush interval");
    cmd->add_option("--write-concern", flags.write_concern,
                    "Write concern: journaled | acknowledged");
    cmd->add_option("--open-reads", flags.open_reads, "GETs need no login: true | false");
    cmd->add_option("--shell-bytes", flags.shell_bytes, "Total app shell size in bytes");
}

/// flags > environment > config file > defaults.
bool build_config(const ConfigFlags& flags, ServerConfig& config, std::string& error) {
    if (!flags.config_file.empty()) {
        auto entries = parse_config_file(flags.config_file);
        if (!entries) {
            error = "cannot read config file " + flags.config_file;
            return false;
        }
        if (auto bad = apply_config_entries(config, *entries)) {
            error = *bad;
            return false;
        }
    }
    apply_config_env(config);

    std::map<std::string, std::string> overrides;
    if (!flags.backend.empty()) {
        overrides["db"] = flags.backend + ":" + (flags.data_dir.empty() ? config.data_dir : flags.data_dir);
    } else if (!flags.data_dir.empty()) {
        overrides["db"] = std::string(backend_name(config.backend)) + ":" + flags.data_dir;
    }
    if (!flags.content_root.empty()) overrides["VRE_GLOBAL_REPOSITORY"] = flags.content_root;
    if (flags.port >= 0) overrides["port"] = std::to_string(flags.port);
    if (flags.flush_interval_ms >= 0) {
        overrides["flushIntervalMs"] = std::to_string(flags.flush_interval_ms);
    }
    if (!flags.write_concern.empty()) overrides["writeConcern"] = flags.write_concern;
    if (!flags.open_reads.empty()) overrides["openReads"] = flags.open_reads;
    if (flags.shell_bytes >= 0) overrides["shellTotalBytes"] = std::to_string(flags.shell_bytes);
    if (auto bad = apply_config_entries(config, overrides)) {
        error = *bad;
        return false;
    }
    return true;
}

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

bool write_text(const std::filesystem::path& path, const std::string& text) {
    return util::write_file(path, text);
}

int write_stats_files(const metrics::StatsTable& stats, const std::filesystem::path& out_dir,
                      const std::string& basename) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!write_text(out_dir / (basename + ".txt"), metrics::render_text(stats)) ||
        !write_text(out_dir / (basename + ".csv"), metrics::render_csv(stats)) ||
        !write_text(out_dir / (basename + ".json"), metrics::stats_to_json(stats).dump(2) + "\n")) {
        return fail("cannot write report files under " + out_dir.string());
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

int run_serve(const ConfigFlags& flags, int for_seconds) {
    ServerConfig config;
    config.echo_access_log = true;
    std::string error;
    if (!build_config(flags, config, error)) return fail(error, kExitUsage);

    api::ApiServer server(config);
    auto status = server.start();
    if (!status.ok) return fail(status.message);
    std::cout << "vre " << backend_name(config.backend) << " backend, data in "
              << config.data_dir << "\nlistening on " << server.base_url() << std::endl;

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(for_seconds);
    while (!g_stop.load()) {
        if (for_seconds > 0 && std::chrono::steady_clock::now() >= deadline) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    server.stop();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// seed
// ---------------------------------------------------------------------------

int run_seed(const ConfigFlags& flags, bool force) {
    ServerConfig config;
    std::string error;
    if (!build_config(flags, config, error)) return fail(error, kExitUsage);

    const std::filesystem::path dir(config.data_dir);
    std::error_code ec;
    if (std::filesystem::exists(dir) && !std::filesystem::is_empty(dir, ec)) {
        if (!force) return fail("data directory not empty: " + config.data_dir + " (use --force)");
        std::filesystem::remove_all(dir, ec);
    }
    std::filesystem::create_directories(dir, ec);
    if (ec) return fail("cannot create data directory " + config.data_dir);

    auto store = store::open_store(config.backend, config.data_dir, config.write_concern_spec());
    try {
        auto summary = seed::seed_store(*store, {}, config.resolved_content_root());
        store->close();
        std::cout << "seeded " << summary.records << " records (" << summary.accounts
                  << " accounts) into " << backend_name(config.backend) << " backend at "
                  << config.data_dir << std::endl;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// loadtest
// ---------------------------------------------------------------------------

int run_loadtest(const ConfigFlags& flags, const std::string& scenario_arg,
                 const std::string& scenario_file, const std::string& mode_arg,
                 const std::string& target, const std::string& out_dir_arg, int users_override,
                 int iterations_override, bool sample_resources, bool keep_data) {
    loadgen::Scenario scenario;
    if (!scenario_file.empty()) {
        auto text = util::read_file(scenario_file);
        if (!text) return fail("cannot read scenario file " + scenario_file, kExitUsage);
        json j = json::parse(*text, nullptr, false);
        auto parsed = loadgen::scenario_from_json(j);
        if (!parsed) return fail("bad scenario file " + scenario_file, kExitUsage);
        scenario = *parsed;
    } else {
        int id = 0;
        try {
            id = std::stoi(scenario_arg);
        } catch (...) {
            id = 0;
        }
        scenario = loadgen::preset_scenario(id);
        if (scenario.id.empty()) {
            return fail("unknown scenario '" + scenario_arg + "' (presets: 1-5)", kExitUsage);
        }
    }
    if (users_override > 0) scenario.concurrent_users = users_override;
    if (iterations_override > 0) scenario.iterations_per_user = iterations_override;
    if (mode_arg == "refresh") scenario.mode = loadgen::RefreshMode::Refresh;
    else if (mode_arg == "norefresh") scenario.mode = loadgen::RefreshMode::NoRefresh;
    else if (!mode_arg.empty() && mode_arg != "preset") {
        return fail("bad --mode (refresh | norefresh | preset)", kExitUsage);
    }

    const std::filesystem::path out_dir(out_dir_arg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    std::string base_url = target;
    std::string backend_label = "external";
    std::unique_ptr<api::ApiServer> server;
    if (target.empty()) {
        // Loopback mode: spawn the service in-process over a fresh seeded
        // store, the single-workstation setup.
        ServerConfig config;
        std::string error;
        if (!build_config(flags, config, error)) return fail(error, kExitUsage);
        if (flags.data_dir.empty()) config.data_dir = (out_dir / "run-data").string();
        config.port = 0;
        std::filesystem::remove_all(config.data_dir, ec);
        std::filesystem::create_directories(config.data_dir, ec);

        {
            auto store =
                store::open_store(config.backend, config.data_dir, config.write_concern_spec());
            try {
                seed::seed_store(*store, {}, config.resolved_content_root());
            } catch (const std::exception& e) {
                return fail(e.what());
            }
            store->close();
        }
        server = std::make_unique<api::ApiServer>(config);
        auto status = server->start();
        if (!status.ok) return fail(status.message);
        base_url = server->base_url();
        backend_label = std::string(backend_name(config.backend));
    }

    loadgen::RunOptions options;
    options.sample_resources = sample_resources;
    std::cout << "running scenario " << scenario.id << " against " << base_url << " ("
              << scenario.concurrent_users << " users)" << std::endl;
    auto outcome = loadgen::run_scenario(scenario, base_url, options);
    if (!outcome.error.ok()) return fail(outcome.error.message);
    outcome.log.backend = backend_label;

    if (server) {
        // Persist the server-side access log next to the client log.
        std::string lines;
        for (const auto& entry : server->access_entries()) {
            lines += api::format_access_line(entry) + "\n";
        }
        write_text(out_dir / "server-access.log", lines);
        server->stop();
    }
    if (!loadgen::save_run_log(outcome.log, (out_dir / "run.log").string())) {
        return fail("cannot write " + (out_dir / "run.log").string());
    }
    auto stats = metrics::compute_stats(outcome.log);
    int rc = write_stats_files(stats, out_dir, "stats");
    if (rc != kExitOk) return rc;
    std::cout << metrics::render_text(stats);
    if (server && !keep_data) {
        std::filesystem::remove_all(out_dir / "run-data", ec);
    }
    std::cout << "artifacts in " << out_dir.string() << std::endl;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report / compare
// ---------------------------------------------------------------------------

int run_report(const std::string& log_path, const std::string& out_dir) {
    auto log = loadgen::load_run_log(log_path);
    if (!log) return fail("cannot read run log " + log_path);
    auto stats = metrics::compute_stats(*log);
    int rc = write_stats_files(stats, out_dir, "stats");
    if (rc != kExitOk) return rc;
    std::cout << metrics::render_text(stats);
    return kExitOk;
}

std::optional<metrics::StatsTable> load_stats_file(const std::string& path) {
    auto text = util::read_file(path);
    if (!text) return std::nullopt;
    if (util::starts_with(util::trim(*text), "{")) {
        json j = json::parse(*text, nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        return metrics::stats_from_json(j);
    }
    return metrics::stats_from_csv(*text);
}

int run_compare(const std::string& a_path, const std::string& b_path,
                const std::string& out_dir_arg) {
    auto a = load_stats_file(a_path);
    if (!a) return fail("cannot parse stats file " + a_path);
    auto b = load_stats_file(b_path);
    if (!b) return fail("cannot parse stats file " + b_path);
    if (a->schema_version != b->schema_version) {
        return fail("SchemaMismatch: stats files use different schema versions");
    }
    auto table = metrics::compare(*a, *b);
    const std::filesystem::path out_dir(out_dir_arg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!write_text(out_dir / "comparison.txt", metrics::render_text(table)) ||
        !write_text(out_dir / "comparison.csv", metrics::render_csv(table)) ||
        !write_text(out_dir / "comparison.json", metrics::comparison_to_json(table).dump(2) + "\n")) {
        return fail("cannot write comparison files under " + out_dir_arg);
    }
    std::cout << metrics::render_text(table);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// shardsim
// ---------------------------------------------------------------------------

int run_shardsim(const std::string& spec_file, int records, int queries,
                 const std::string& out_dir_arg) {
    shardsim::ClusterSpec spec;
    spec.key.split_points = {5000, 10000};
    if (!spec_file.empty()) {
        auto text = util::read_file(spec_file);
        if (!text) return fail("cannot read cluster spec " + spec_file, kExitUsage);
        json j = json::parse(*text, nullptr, false);
        auto parsed = shardsim::cluster_spec_from_json(j);
        if (!parsed) return fail("bad cluster spec " + spec_file, kExitUsage);
        spec = *parsed;
    }

    shardsim::ShardCluster cluster(spec);
    store::DocumentStore oracle("");  // unsharded reference

    std::mt19937_64 rng(42);
    const std::int64_t key_space = 15000;
    std::vector<std::int64_t> keys;
    for (int i = 0; i < records; ++i) {
        const std::int64_t key = static_cast<std::int64_t>(rng() % key_space);
        json record{{spec.key.field, key},
                    {"bucket", static_cast<int>(key % 7)},
                    {"payload", "record-" + std::to_string(i)}};
        auto inserted = cluster.insert(record);
        if (!inserted.ok()) return fail("insert failed: " + inserted.status.detail);
        record["_id"] = inserted.value;
        oracle.create(spec.collection, record);
        keys.push_back(key);
    }
    std::cout << "cluster: " << cluster.shard_count() << " shards, " << cluster.router_count()
              << " routers, " << cluster.total_records() << " records" << std::endl;

    bool all_ok = true;
    auto check = [&all_ok](bool ok, const std::string& what) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << std::endl;
        all_ok = all_ok && ok;
    };

    auto sorted_dump = [](std::vector<json> docs) {
        std::vector<std::string> out;
        out.reserve(docs.size());
        for (const auto& d : docs) out.push_back(d.dump());
        std::sort(out.begin(), out.end());
        return out;
    };

    bool keyed_ok = true, keyless_ok = true, match_ok = true;
    for (int q = 0; q < queries; ++q) {
        const std::int64_t key = keys[rng() % keys.size()];
        auto keyed = cluster.query(json{{spec.key.field, key}});
        keyed_ok = keyed_ok && keyed.ok() && keyed.shards_contacted == 1;
        match_ok = match_ok && sorted_dump(keyed.docs) ==
                                   sorted_dump(oracle.query(spec.collection,
                                                            json{{spec.key.field, key}}));
        auto keyless = cluster.query(json{{"bucket", static_cast<int>(key % 7)}});
        keyless_ok = keyless_ok && keyless.ok() &&
                     keyless.shards_contacted == cluster.shard_count();
        match_ok = match_ok &&
                   sorted_dump(keyless.docs) ==
                       sorted_dump(oracle.query(spec.collection,
                                                json{{"bucket", static_cast<int>(key % 7)}}));
    }
    check(keyed_ok, "keyed queries contact exactly 1 shard");
    check(keyless_ok, "keyless queries contact every shard");
    check(match_ok, "results match the unsharded oracle");

    // Router failover.
    if (cluster.router_count() > 1) {
        cluster.fail_router(0);
        bool failover_ok = true;
        for (int q = 0; q < 100; ++q) {
            const std::int64_t key = keys[rng() % keys.size()];
            auto r = cluster.query(json{{spec.key.field, key}});
            failover_ok = failover_ok && r.ok();
        }
        check(failover_ok, "100 requests succeed with one router down");
        cluster.revive_router(0);
    }

    // Split and re-verify.
    const std::size_t before = cluster.total_records();
    auto split = cluster.add_shard(7500);
    check(split.ok(), "add_shard(7500) accepted");
    check(cluster.total_records() == before, "record count preserved across the split");
    bool post_split_ok = true;
    for (int q = 0; q < 50; ++q) {
        const std::int64_t key = keys[rng() % keys.size()];
        auto keyed = cluster.query(json{{spec.key.field, key}});
        post_split_ok = post_split_ok && keyed.ok() && keyed.shards_contacted == 1 &&
                        sorted_dump(keyed.docs) ==
                            sorted_dump(oracle.query(spec.collection,
                                                     json{{spec.key.field, key}}));
    }
    check(post_split_ok, "post-split query results unchanged");
    if (spec.replica_count > 0) check(cluster.replicas_consistent(), "replicas consistent");

    std::cout << "shardsContacted histogram:" << std::endl;
    json histogram = json::object();
    for (const auto& [contacted, count] : cluster.contacted_histogram()) {
        std::cout << "  " << contacted << " shard(s): " << count << " queries" << std::endl;
        histogram[std::to_string(contacted)] = count;
    }
    if (!out_dir_arg.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir_arg, ec);
        json report{{"spec", shardsim::cluster_spec_to_json(cluster.spec())},
                    {"records", cluster.total_records()},
                    {"histogram", histogram},
                    {"all_ok", all_ok}};
        write_text(std::filesystem::path(out_dir_arg) / "shardsim.json", report.dump(2) + "\n");
    }
    return all_ok ? kExitOk : kExitRuntime;
}

// ---------------------------------------------------------------------------
// dump
// ---------------------------------------------------------------------------

int run_dump(const ConfigFlags& flags, const std::string& collection_filter,
             const std::string& raw_table) {
    ServerConfig config;
    std::string error;
    if (!build_config(flags, config, error)) return fail(error, kExitUsage);

    auto store = store::open_store(config.backend, config.data_dir, config.write_concern_spec());
    if (!raw_table.empty()) {
        auto* normalized = dynamic_cast<store::NormalizedStore*>(store.get());
        if (normalized == nullptr) return fail("--raw-table needs the normalized backend", kExitUsage);
        for (const auto& row : normalized->raw_table(raw_table)) std::cout << row.dump() << '\n';
        return kExitOk;
    }
    for (const char* collection : model::kCollections) {
        if (!collection_filter.empty() && collection_filter != collection) continue;
        for (const auto& doc : store->list(collection)) {
            std::cout << collection << '\t' << doc.dump() << '\n';
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VRE rehabilitation platform benchmark workbench"};
    app.require_subcommand(1);

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Run the REST service");
    ConfigFlags serve_flags;
    add_config_flags(serve_cmd, serve_flags);
    int for_seconds = 0;
    serve_cmd->add_option("--for-seconds", for_seconds, "Exit after N seconds (0 = run until signal)");

    // seed
    auto* seed_cmd = app.add_subcommand("seed", "Populate a fresh data directory with the fixture");
    ConfigFlags seed_flags;
    add_config_flags(seed_cmd, seed_flags);
    bool force = false;
    seed_cmd->add_flag("--force", force, "Wipe a non-empty data directory first");

    // loadtest
    auto* load_cmd = app.add_subcommand("loadtest", "Replay a benchmark scenario");
    ConfigFlags load_flags;
    add_config_flags(load_cmd, load_flags);
    std::string scenario_arg = "1", scenario_file, mode_arg = "preset", target;
    std::string load_out = "./vre-out";
    int users_override = 0, iterations_override = 0;
    bool sample_resources = false, keep_data = false;
    load_cmd->add_option("--scenario", scenario_arg, "Preset scenario id (1-5)");
    load_cmd->add_option("--scenario-file", scenario_file, "Scenario definition file (JSON)");
    load_cmd->add_option("--mode", mode_arg, "refresh | norefresh | preset");
    load_cmd->add_option("--target", target, "Benchmark an already-running service at this URL");
    load_cmd->add_option("--out", load_out, "Artifact directory");
    load_cmd->add_option("--users", users_override, "Override concurrent users");
    load_cmd->add_option("--iterations", iterations_override, "Override iterations per user");
    load_cmd->add_flag("--sample-resources", sample_resources, "Record CPU/memory samples");
    load_cmd->add_flag("--keep-data", keep_data, "Keep the spawned run-data directory");

    // report
    auto* report_cmd = app.add_subcommand("report", "Compute the stats table from a run log");
    std::string report_log, report_out = "./vre-out";
    report_cmd->add_option("--log", report_log, "Run log file")->required();
    report_cmd->add_option("--out", report_out, "Artifact directory");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "A/B comparison of two stats files");
    std::string cmp_a, cmp_b, cmp_out = "./vre-out";
    compare_cmd->add_option("--a", cmp_a, "Baseline stats file (.json or .csv)")->required();
    compare_cmd->add_option("--b", cmp_b, "Candidate stats file (.json or .csv)")->required();
    compare_cmd->add_option("--out", cmp_out, "Artifact directory");

    // shardsim
    auto* shard_cmd = app.add_subcommand("shardsim", "Range-sharding and router failover simulation");
    std::string shard_spec, shard_out;
    int shard_records = 10000, shard_queries = 200;
    shard_cmd->add_option("--spec", shard_spec, "Cluster spec file (JSON)");
    shard_cmd->add_option("--records", shard_records, "Records to seed");
    shard_cmd->add_option("--queries", shard_queries, "Query pairs to run");
    shard_cmd->add_option("--out", shard_out, "Artifact directory");

    // dump
    auto* dump_cmd = app.add_subcommand("dump", "Emit collections as line-delimited documents");
    ConfigFlags dump_flags;
    add_config_flags(dump_cmd, dump_flags);
    std::string dump_collection, dump_raw_table;
    dump_cmd->add_option("--collection", dump_collection, "Only this collection");
    dump_cmd->add_option("--raw-table", dump_raw_table,
                         "Normalized backend: dump an internal table (e.g. content_video)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (serve_cmd->parsed()) return run_serve(serve_flags, for_seconds);
        if (seed_cmd->parsed()) return run_seed(seed_flags, force);
        if (load_cmd->parsed()) {
            return run_loadtest(load_flags, scenario_arg, scenario_file, mode_arg, target, load_out,
                                users_override, iterations_override, sample_resources, keep_data);
        }
        if (report_cmd->parsed()) return run_report(report_log, report_out);
        if (compare_cmd->parsed()) return run_compare(cmp_a, cmp_b, cmp_out);
        if (shard_cmd->parsed()) return run_shardsim(shard_spec, shard_records, shard_queries, shard_out);
        if (dump_cmd->parsed()) return run_dump(dump_flags, dump_collection, dump_raw_table);
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return kExitUsage;
}
