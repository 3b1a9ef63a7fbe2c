#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vre/auth.hpp"
#include "vre/config.hpp"
#include "vre/shell.hpp"
#include "vre/store.hpp"

namespace httplib {
class Server;
}

namespace vre::api {

struct RouteEntry {
    std::string method;
    std::string path;
    std::string guard;    // "accounts.requiresLogin" or ""
    std::string handler;  // controller.function
};

/// The REST route table: for every collection a root GET(list)/POST(create)
/// pair and an item GET(read)/PUT(update)/DELETE(delete) triple, mutating
/// routes guarded, plus the auth endpoints.
std::vector<RouteEntry> route_table();

struct AccessLogEntry {
    std::string method;
    std::string path;
    int status = 0;
    double elapsed_ms = 0;
    std::uint64_t bytes = 0;
    double store_ms = 0;  // in-memory only, not part of the printed line
    std::int64_t t_unix_ms = 0;
};

/// "<METHOD> <path> <status> <elapsed ms> - <bytes>"
std::string format_access_line(const AccessLogEntry& entry);
std::optional<AccessLogEntry> parse_access_line(std::string_view line);
std::vector<AccessLogEntry> parse_access_log(const std::string& path);

struct ApiStatus {
    bool ok = true;
    std::string message;
};

inline constexpr const char* kSessionCookie = "vre.sid";

/// The VRE HTTP service over one storage backend. Requests are handled
/// concurrently; handlers keep no mutable state outside the store and the
/// session table.
class ApiServer {
public:
    explicit ApiServer(ServerConfig config);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds and serves on a background thread. Fails with PortInUse /
    /// BadConfig messages.
    ApiStatus start();
    void stop();

    int port() const { return port_; }
    std::string base_url() const;

    store::Store& store() { return *store_; }
    const ServerConfig& config() const { return config_; }
    auth::SessionTable& sessions() { return sessions_; }

    std::vector<AccessLogEntry> access_entries() const;

private:
    class Impl;
    friend class Impl;

    ServerConfig config_;
    std::unique_ptr<store::Store> store_;
    auth::SessionTable sessions_;
    std::vector<ShellAsset> shell_;
    std::unique_ptr<Impl> impl_;
    std::thread serve_thread_;
    int port_ = 0;
    bool running_ = false;
};

}  // namespace vre::api
