#include "vre/api_server.hpp"

#include <httplib.h>

#include <charconv>
#include <filesystem>
#include <fstream>

#include "vre/crypto.hpp"
#include "vre/util.hpp"

namespace vre::api {

namespace {

struct ApiCollectionDef {
    const char* collection;
    const char* route;       // "/api/<route>"
    const char* param;       // item id parameter name
    const char* controller;  // handler name prefix
};

constexpr ApiCollectionDef kApiCollections[] = {
    {"Accounts", "account", "accountId", "accounts"},
    {"Administrators", "administrator", "administratorId", "administrators"},
    {"Categories", "category", "categoryId", "categories"},
    {"Clinicians", "clinician", "clinicianId", "clinicians"},
    {"CliniciansPatients", "clinicianpatient", "clinicianPatientId", "cliniciansPatients"},
    {"Contents", "repository", "repositoryId", "repository"},
    {"Goals", "goal", "goalId", "goals"},
    {"Information", "information", "informationId", "information"},
    {"Patients", "patient", "patientId", "patients"},
    {"TreatmentContent", "treatmentcontent", "treatmentContentId", "treatmentContent"},
    {"Treatments", "treatment", "treatmentId", "treatments"},
};

thread_local double t_store_ms = 0;

int status_for(store::ErrCode code) {
    switch (code) {
        case store::ErrCode::None: return 200;
        case store::ErrCode::NotFound: return 404;
        case store::ErrCode::BadRecord: return 400;
        case store::ErrCode::ReferentialViolation: return 409;
        case store::ErrCode::DuplicateKey: return 409;
        case store::ErrCode::StoreClosed: return 503;
    }
    return 500;
}

void set_json(httplib::Response& res, const json& body) {
    res.set_content(body.dump(), "application/json");
}

void set_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    set_json(res, json{{"message", message}});
}

std::optional<json> parse_body(const httplib::Request& req) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) return std::nullopt;
    return body;
}

std::optional<std::string> cookie_value(const httplib::Request& req, std::string_view name) {
    if (!req.has_header("Cookie")) return std::nullopt;
    for (const auto& part : util::split(req.get_header_value("Cookie"), ';')) {
        const std::string entry = util::trim(part);
        auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        if (entry.substr(0, eq) == name) return entry.substr(eq + 1);
    }
    return std::nullopt;
}

std::string file_extension(const std::string& filename) {
    auto dot = filename.find_last_of('.');
    if (dot == std::string::npos || dot + 1 == filename.size()) return {};
    return filename.substr(dot);
}

}  // namespace

std::vector<RouteEntry> route_table() {
    std::vector<RouteEntry> table;
    const std::string guard = "accounts.requiresLogin";
    for (const auto& def : kApiCollections) {
        const std::string root = std::string("/api/") + def.route;
        const std::string item = root + "/:" + def.param;
        const std::string controller = def.controller;
        const char* create_handler = std::string_view(def.collection) == "Contents" ? "upload" : "create";
        table.push_back({"GET", root, "", controller + ".list"});
        table.push_back({"POST", root, guard, controller + "." + create_handler});
        table.push_back({"GET", item, "", controller + ".read"});
        table.push_back({"PUT", item, guard, controller + ".update"});
        table.push_back({"DELETE", item, guard, controller + ".delete"});
    }
    table.push_back({"POST", "/api/auth/login", "", "auth.login"});
    table.push_back({"POST", "/api/auth/logout", guard, "auth.logout"});
    return table;
}

std::string format_access_line(const AccessLogEntry& entry) {
    return entry.method + " " + entry.path + " " + std::to_string(entry.status) + " " +
           util::format_double(entry.elapsed_ms, 3) + " ms - " + std::to_string(entry.bytes);
}

std::optional<AccessLogEntry> parse_access_line(std::string_view line) {
    auto tokens = util::split(util::trim(line), ' ');
    if (tokens.size() != 7 || tokens[4] != "ms" || tokens[5] != "-") return std::nullopt;
    AccessLogEntry entry;
    entry.method = tokens[0];
    entry.path = tokens[1];
    try {
        entry.status = std::stoi(tokens[2]);
        entry.elapsed_ms = std::stod(tokens[3]);
        entry.bytes = std::stoull(tokens[6]);
    } catch (...) {
        return std::nullopt;
    }
    return entry;
}

std::vector<AccessLogEntry> parse_access_log(const std::string& path) {
    std::vector<AccessLogEntry> entries;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (auto entry = parse_access_line(line)) entries.push_back(*entry);
    }
    return entries;
}

// ---------------------------------------------------------------------------
// Server implementation
// ---------------------------------------------------------------------------

class ApiServer::Impl {
public:
    explicit Impl(ApiServer& owner) : owner_(owner) {}

    using Handler = std::function<void(const httplib::Request&, httplib::Response&,
                                       const std::optional<auth::Session>&)>;

    ApiServer& owner_;
    httplib::Server svr;
    std::ofstream access_file;
    mutable std::mutex log_mu;
    std::vector<AccessLogEntry> entries;

    store::Store& store() { return *owner_.store_; }
    const ServerConfig& config() const { return owner_.config_; }

    template <class F>
    auto timed_store(F&& f) {
        const double t0 = util::steady_millis();
        auto result = f();
        t_store_ms += util::steady_millis() - t0;
        return result;
    }

    std::optional<auth::Session> find_session(const httplib::Request& req) {
        auto token = cookie_value(req, kSessionCookie);
        if (!token) return std::nullopt;
        return owner_.sessions_.find(*token);
    }

    void log_request(const httplib::Request& req, const httplib::Response& res, double t0) {
        AccessLogEntry entry;
        entry.method = req.method;
        entry.path = req.path;
        entry.status = res.status;
        entry.elapsed_ms = util::steady_millis() - t0;
        entry.bytes = res.body.size();
        entry.store_ms = t_store_ms;
        entry.t_unix_ms = util::unix_millis();
        const std::string line = format_access_line(entry);
        std::lock_guard<std::mutex> lock(log_mu);
        entries.push_back(std::move(entry));
        if (access_file.is_open()) access_file << line << '\n';
        if (config().echo_access_log) std::printf("%s\n", line.c_str());
    }

    /// Registers a handler wrapped with the login guard, timing and the
    /// access log.
    void route(const std::string& method, const std::string& pattern, bool guarded, Handler h) {
        auto wrapped = [this, guarded, h = std::move(h)](const httplib::Request& req,
                                                         httplib::Response& res) {
            const double t0 = util::steady_millis();
            t_store_ms = 0;
            auto session = find_session(req);
            // openReads only opens the API GETs; the shell is always public.
            const bool needs_login =
                guarded || (!config().open_reads && req.method == "GET" &&
                            util::starts_with(req.path, "/api/"));
            if (needs_login && !session) {
                set_error(res, 401, "login required");
            } else {
                h(req, res, session);
            }
            log_request(req, res, t0);
        };
        if (method == "GET") svr.Get(pattern, wrapped);
        else if (method == "POST") svr.Post(pattern, wrapped);
        else if (method == "PUT") svr.Put(pattern, wrapped);
        else if (method == "DELETE") svr.Delete(pattern, wrapped);
    }

    void respond_store_error(httplib::Response& res, const store::Status& status) {
        set_error(res, status_for(status.code), status.detail);
    }

    // -- collection handlers ------------------------------------------------

    void handle_list(const std::string& collection, httplib::Response& res) {
        auto rows = timed_store([&] { return store().list(collection); });
        json out = json::array();
        for (auto& row : rows) out.push_back(model::sanitize_for_api(collection, std::move(row)));
        set_json(res, out);
    }

    void handle_read(const std::string& collection, const std::string& id, httplib::Response& res) {
        auto r = timed_store([&] { return store().read(collection, id); });
        if (!r.ok()) return respond_store_error(res, r.status);
        set_json(res, model::sanitize_for_api(collection, std::move(r.value)));
    }

    void respond_created(const std::string& collection, const EntityId& id, httplib::Response& res) {
        auto created = timed_store([&] { return store().read(collection, id); });
        if (!created.ok()) return respond_store_error(res, created.status);
        set_json(res, model::sanitize_for_api(collection, std::move(created.value)));
    }

    void handle_account_create(json body, httplib::Response& res) {
        const std::string username = body.value("username", std::string{});
        if (username.empty()) return set_error(res, 400, "missing username");
        if (!model::role_from_string(body.value("role", std::string{}))) {
            return set_error(res, 400, "bad role");
        }
        if (body.contains("password")) {
            if (!body["password"].is_string() || body["password"].get<std::string>().empty()) {
                return set_error(res, 400, "bad password");
            }
            json credentials = auth::account_credential_fields(body["password"].get<std::string>());
            body.erase("password");
            body.update(credentials);
        }
        auto existing = timed_store([&] {
            return store().query("Accounts", json{{"username", username}});
        });
        if (!existing.empty()) return set_error(res, 409, "username taken");
        auto r = timed_store([&] { return store().create("Accounts", std::move(body)); });
        if (!r.ok()) return respond_store_error(res, r.status);
        respond_created("Accounts", r.value, res);
    }

    /// Link creation shared by CliniciansPatients and TreatmentContent:
    /// both ends must exist (404), the pair must be new (409).
    void handle_link_create(const std::string& collection, const json& body,
                            httplib::Response& res) {
        std::vector<std::pair<std::string, std::string>> ends;  // field -> collection
        if (collection == "CliniciansPatients") {
            ends = {{"clinician_id", "Clinicians"}, {"patient_id", "Patients"}};
        } else {
            const bool has_treatment = body.contains("treatment_id");
            const bool has_information = body.contains("information_id");
            if (has_treatment == has_information) {
                return set_error(res, 400, "exactly one of treatment_id or information_id required");
            }
            if (has_treatment) ends.push_back({"treatment_id", "Treatments"});
            if (has_information) ends.push_back({"information_id", "Information"});
            ends.push_back({"content_id", "Contents"});
        }
        json pair_probe = json::object();
        for (const auto& [field, target] : ends) {
            if (!body.contains(field) || !body[field].is_string()) {
                return set_error(res, 400, "missing " + field);
            }
            const std::string id = body[field].get<std::string>();
            auto r = timed_store([&] { return store().read(target, id); });
            if (!r.ok()) return set_error(res, 404, "unknown " + field);
            pair_probe[field] = id;
        }
        auto duplicates = timed_store([&] { return store().query(collection, pair_probe); });
        if (!duplicates.empty()) return set_error(res, 409, "duplicate link");
        auto r = timed_store([&] { return store().create(collection, body); });
        if (!r.ok()) return respond_store_error(res, r.status);
        respond_created(collection, r.value, res);
    }

    void handle_create(const std::string& collection, const httplib::Request& req,
                       httplib::Response& res) {
        auto body = parse_body(req);
        if (!body) return set_error(res, 400, "malformed body");
        if (collection == "Accounts") return handle_account_create(std::move(*body), res);
        if (collection == "CliniciansPatients" || collection == "TreatmentContent") {
            return handle_link_create(collection, *body, res);
        }
        auto r = timed_store([&] { return store().create(collection, std::move(*body)); });
        if (!r.ok()) return respond_store_error(res, r.status);
        respond_created(collection, r.value, res);
    }

    void handle_update(const std::string& collection, const std::string& id,
                       const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req);
        if (!body) return set_error(res, 400, "malformed body");
        if (collection == "Accounts" && body->contains("password")) {
            if (!(*body)["password"].is_string()) return set_error(res, 400, "bad password");
            json credentials = auth::account_credential_fields((*body)["password"].get<std::string>());
            body->erase("password");
            body->update(credentials);
        }
        auto r = timed_store([&] { return store().update(collection, id, *body); });
        if (!r.ok()) return respond_store_error(res, r.status);
        set_json(res, model::sanitize_for_api(collection, std::move(r.value)));
    }

    void handle_delete(const std::string& collection, const std::string& id,
                       httplib::Response& res) {
        auto r = timed_store([&] { return store().remove(collection, id); });
        if (!r.ok()) return respond_store_error(res, r.status);
        set_json(res, model::sanitize_for_api(collection, std::move(r.value)));
    }

    void handle_upload(const httplib::Request& req, httplib::Response& res,
                       const std::optional<auth::Session>& session) {
        if (session->role == model::Role::Patient) {
            return set_error(res, 401, "not permitted");
        }
        if (!req.has_file("file")) return set_error(res, 400, "missing file");
        const auto file = req.get_file_value("file");

        json meta;
        if (req.has_file("data")) {
            meta = json::parse(req.get_file_value("data").content, nullptr, false);
            if (meta.is_discarded() || !meta.is_object()) return set_error(res, 400, "bad metadata");
        } else {
            meta = json::object();
            for (const char* field : {"name", "pat_desc", "clin_desc", "category"}) {
                if (req.has_file(field)) meta[field] = req.get_file_value(field).content;
            }
        }
        const std::string name = meta.value("name", std::string{});
        const std::string category = meta.value("category", std::string{});
        if (name.empty() || category.empty()) return set_error(res, 400, "missing metadata");
        auto cat = timed_store([&] { return store().read("Categories", category); });
        if (!cat.ok()) return set_error(res, 400, "unknown category");

        // Move into the repository under a fresh unique name, extension kept.
        const std::string root = config().resolved_content_root();
        const std::string filename = crypto::random_token(24) + file_extension(file.filename);
        const std::string path = root + "/" + filename;
        std::error_code ec;
        std::filesystem::create_directories(root, ec);
        if (!util::write_file(path, file.content)) {
            return set_error(res, 507, "content root unwritable");
        }

        json content{{"name", name},
                     {"media_type", file.content_type},
                     {"patient_description", meta.value("pat_desc", std::string{})},
                     {"clinician_description", meta.value("clin_desc", std::string{})},
                     {"category_id", category},
                     {"path", path},
                     {"creator_id", session->account_id},
                     {"kind", model::to_string(model::content_kind_from_media_type(file.content_type))}};
        auto r = timed_store([&] { return store().create("Contents", std::move(content)); });
        if (!r.ok()) return respond_store_error(res, r.status);
        respond_created("Contents", r.value, res);
    }

    void handle_login(const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req);
        // Uniform failure: unknown user, wrong password and bad input are
        // byte-identical to the caller.
        const auto fail = [&res] { set_error(res, 401, "authentication failed"); };
        if (!body) return fail();
        const std::string username = body->value("username", std::string{});
        const std::string password = body->value("password", std::string{});
        auth::AuthService auth_service(store(), owner_.sessions_);
        auto session = auth_service.login(username, password);
        if (!session) return fail();
        res.set_header("Set-Cookie",
                       std::string(kSessionCookie) + "=" + session->token + "; Path=/; HttpOnly");
        set_json(res, json{{"token", session->token},
                           {"account_id", session->account_id},
                           {"role", model::to_string(session->role)}});
    }

    void handle_logout(const httplib::Request& req, httplib::Response& res) {
        auto token = cookie_value(req, kSessionCookie);
        if (token) owner_.sessions_.revoke(*token);
        set_json(res, json{{"message", "logged out"}});
    }

    void register_routes() {
        for (const auto& def : kApiCollections) {
            const std::string collection = def.collection;
            const std::string root = std::string("/api/") + def.route;
            const std::string item = root + "/:" + std::string(def.param);
            const std::string param = def.param;

            route("GET", root, false,
                  [this, collection](const auto&, auto& res, const auto&) {
                      handle_list(collection, res);
                  });
            if (collection == "Contents") {
                route("POST", root, true,
                      [this](const auto& req, auto& res, const auto& session) {
                          handle_upload(req, res, session);
                      });
            } else {
                route("POST", root, true,
                      [this, collection](const auto& req, auto& res, const auto&) {
                          handle_create(collection, req, res);
                      });
            }
            route("GET", item, false,
                  [this, collection, param](const auto& req, auto& res, const auto&) {
                      handle_read(collection, req.path_params.at(param), res);
                  });
            route("PUT", item, true,
                  [this, collection, param](const auto& req, auto& res, const auto&) {
                      handle_update(collection, req.path_params.at(param), req, res);
                  });
            route("DELETE", item, true,
                  [this, collection, param](const auto& req, auto& res, const auto&) {
                      handle_delete(collection, req.path_params.at(param), res);
                  });
        }

        route("POST", "/api/auth/login", false,
              [this](const auto& req, auto& res, const auto&) { handle_login(req, res); });
        route("POST", "/api/auth/logout", true,
              [this](const auto& req, auto& res, const auto&) { handle_logout(req, res); });

        for (const auto& asset : owner_.shell_) {
            route("GET", asset.path, false,
                  [&asset](const httplib::Request& req, httplib::Response& res, const auto&) {
                      res.set_header("ETag", asset.etag);
                      if (req.get_header_value("If-None-Match") == asset.etag) {
                          res.status = 304;
                          return;
                      }
                      res.set_content(asset.bytes, asset.content_type);
                  });
        }

        route("GET", "/", false, [](const auto&, httplib::Response& res, const auto&) {
            res.set_content("VRE", "text/plain");
        });
    }
};

ApiServer::ApiServer(ServerConfig config) : config_(std::move(config)) {
    shell_ = make_shell(config_.shell_total_bytes);
}

ApiServer::~ApiServer() {
    stop();
    if (store_) store_->close();
}

ApiStatus ApiServer::start() {
    if (running_) return {false, "already running"};
    if (!config_.data_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(config_.data_dir, ec);
        if (ec) return {false, "BadConfig: data directory not writable"};
    }
    store_ = store::open_store(config_.backend, config_.data_dir, config_.write_concern_spec());

    impl_ = std::make_unique<Impl>(*this);
    if (!config_.data_dir.empty()) {
        impl_->access_file.open(config_.resolved_access_log_path(), std::ios::app);
    }
    impl_->svr.new_task_queue = [] { return new httplib::ThreadPool(24); };
    impl_->register_routes();

    if (config_.port == 0) {
        port_ = impl_->svr.bind_to_any_port("0.0.0.0");
        if (port_ <= 0) return {false, "PortInUse: could not bind an ephemeral port"};
    } else {
        if (!impl_->svr.bind_to_port("0.0.0.0", config_.port)) {
            return {false, "PortInUse: could not bind port " + std::to_string(config_.port)};
        }
        port_ = config_.port;
    }
    serve_thread_ = std::thread([this] { impl_->svr.listen_after_bind(); });
    impl_->svr.wait_until_ready();
    running_ = true;
    return {};
}

void ApiServer::stop() {
    if (!running_) return;
    impl_->svr.stop();
    if (serve_thread_.joinable()) serve_thread_.join();
    if (impl_->access_file.is_open()) impl_->access_file.flush();
    running_ = false;
}

std::string ApiServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

std::vector<AccessLogEntry> ApiServer::access_entries() const {
    std::lock_guard<std::mutex> lock(impl_->log_mu);
    return impl_->entries;
}

}  // namespace vre::api
