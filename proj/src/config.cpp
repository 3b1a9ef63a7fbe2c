#include "vre/config.hpp"

#include <cstdlib>
#include <fstream>

#include "vre/util.hpp"

namespace vre {

std::string ServerConfig::resolved_content_root() const {
    return content_root.empty() ? data_dir + "/repository" : content_root;
}

std::string ServerConfig::resolved_access_log_path() const {
    return access_log_path.empty() ? data_dir + "/access.log" : access_log_path;
}

store::WriteConcern ServerConfig::write_concern_spec() const {
    return {write_concern, flush_interval_ms};
}

std::optional<std::map<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = util::trim(line.substr(0, eq));
        std::string value = util::trim(line.substr(eq + 1));
        if (!key.empty()) entries[key] = value;
    }
    return entries;
}

std::optional<std::pair<BackendKind, std::string>> parse_db_selector(const std::string& value) {
    std::string kind = value;
    std::string dir;
    if (auto colon = value.find(':'); colon != std::string::npos) {
        kind = value.substr(0, colon);
        dir = value.substr(colon + 1);
        while (util::starts_with(dir, "//")) dir.erase(0, 2);
    }
    if (kind == "document") return std::make_pair(BackendKind::Document, dir);
    if (kind == "normalized") return std::make_pair(BackendKind::Normalized, dir);
    return std::nullopt;
}

namespace {

std::optional<bool> parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    return std::nullopt;
}

}  // namespace

std::optional<std::string> apply_config_entries(ServerConfig& config,
                                                const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) {
        if (key == "db") {
            auto parsed = parse_db_selector(value);
            if (!parsed) return "bad db selector: " + value;
            config.backend = parsed->first;
            if (!parsed->second.empty()) config.data_dir = parsed->second;
        } else if (key == "sessionSecret") {
            config.session_secret = value;
        } else if (key == "VRE_GLOBAL_REPOSITORY") {
            config.content_root = value;
        } else if (key == "port") {
            try {
                config.port = std::stoi(value);
            } catch (...) {
                return "bad port: " + value;
            }
        } else if (key == "openReads") {
            auto b = parse_bool(value);
            if (!b) return "bad openReads: " + value;
            config.open_reads = *b;
        } else if (key == "flushIntervalMs") {
            try {
                config.flush_interval_ms = std::stoi(value);
            } catch (...) {
                return "bad flushIntervalMs: " + value;
            }
        } else if (key == "writeConcern") {
            if (value == "journaled") {
                config.write_concern = store::WriteConcernMode::Journaled;
            } else if (value == "acknowledged") {
                config.write_concern = store::WriteConcernMode::AcknowledgedUnjournaled;
            } else {
                return "bad writeConcern: " + value;
            }
        } else if (key == "shellTotalBytes") {
            try {
                config.shell_total_bytes = static_cast<std::size_t>(std::stoll(value));
            } catch (...) {
                return "bad shellTotalBytes: " + value;
            }
        } else if (key == "accessLog") {
            config.access_log_path = value;
        }
        // Unknown keys are ignored.
    }
    return std::nullopt;
}

void apply_config_env(ServerConfig& config) {
    std::map<std::string, std::string> entries;
    auto take = [&entries](const char* env, const char* key) {
        if (const char* value = std::getenv(env); value != nullptr && *value != '\0') {
            entries[key] = value;
        }
    };
    take("VRE_DB", "db");
    take("VRE_SESSION_SECRET", "sessionSecret");
    take("VRE_GLOBAL_REPOSITORY", "VRE_GLOBAL_REPOSITORY");
    take("VRE_PORT", "port");
    take("VRE_OPEN_READS", "openReads");
    take("VRE_FLUSH_INTERVAL_MS", "flushIntervalMs");
    take("VRE_WRITE_CONCERN", "writeConcern");
    take("VRE_SHELL_TOTAL_BYTES", "shellTotalBytes");
    take("VRE_ACCESS_LOG", "accessLog");
    apply_config_entries(config, entries);
}

}  // namespace vre
