#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "vre/store.hpp"

namespace vre {

/// Service configuration. File keys mirror the deployment config
/// (db, sessionSecret, VRE_GLOBAL_REPOSITORY, port, openReads,
/// flushIntervalMs) plus artifact additions. Precedence when loading:
/// command-line flags > environment (VRE_*) > config file > defaults.
struct ServerConfig {
    BackendKind backend = BackendKind::Document;
    std::string data_dir = "./vre-data";
    std::string session_secret = "developmentSessionSecret";
    std::string content_root;  // defaults to <data_dir>/repository
    int port = 3333;           // 0 = pick an ephemeral port
    bool open_reads = true;    // GETs require no login (testing default)
    int flush_interval_ms = 100;
    store::WriteConcernMode write_concern = store::WriteConcernMode::Journaled;
    std::size_t shell_total_bytes = 6'000'000;  // static app shell payload
    std::string access_log_path;  // defaults to <data_dir>/access.log
    bool echo_access_log = false;

    std::string resolved_content_root() const;
    std::string resolved_access_log_path() const;
    store::WriteConcern write_concern_spec() const;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys are kept
/// (callers may extend) but ignored by apply_config_entries.
std::optional<std::map<std::string, std::string>> parse_config_file(const std::string& path);

/// Applies recognized entries onto a config. Returns an error message for a
/// malformed value, std::nullopt on success.
std::optional<std::string> apply_config_entries(ServerConfig& config,
                                                const std::map<std::string, std::string>& entries);

/// Reads VRE_* environment variables onto the config.
void apply_config_env(ServerConfig& config);

/// Splits a db selector "backend:directory" (e.g. "document:./data").
std::optional<std::pair<BackendKind, std::string>> parse_db_selector(const std::string& value);

}  // namespace vre
