#include "vre/loadgen.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <latch>
#include <map>
#include <thread>

#include "vre/shell.hpp"
#include "vre/util.hpp"

namespace vre::loadgen {

// ---------------------------------------------------------------------------
// Built-in scripts
// ---------------------------------------------------------------------------

namespace {

VirtualUserScript make_add100() {
    VirtualUserScript s;
    s.name = "Add100";
    s.steps.push_back(LoginStep{"admin", "admin"});
    LoopStep loop;
    loop.count = 100;
    loop.body.push_back(RequestStep{
        "Create account", "POST", "/api/account",
        json{{"username", "clin-u{{user}}-t{{iteration}}-n{{i}}"},
             {"password", "clinician"},
             {"role", "Clinician"}},
        "", false, false});
    s.steps.push_back(std::move(loop));
    s.steps.push_back(LogoutStep{});
    return s;
}

VirtualUserScript make_goal100() {
    VirtualUserScript s;
    s.name = "Goal100";
    s.steps.push_back(LoginStep{"clinician{{user10}}", "clinician"});
    s.steps.push_back(RequestStep{"View patient list", "GET", "/api/patient", {}, "patients",
                                  false, true});
    LoopStep loop;
    loop.count = 100;
    loop.body.push_back(RequestStep{
        "Create goal", "POST", "/api/goal",
        json{{"patient_id", "{{patients[0]._id}}"},
             {"description", "Practice reaching exercise {{i}}"},
             {"term", "Short"}},
        "", false, false});
    s.steps.push_back(std::move(loop));
    s.steps.push_back(LogoutStep{});
    return s;
}

VirtualUserScript make_view100() {
    VirtualUserScript s;
    s.name = "View100";
    s.steps.push_back(LoginStep{"clinician{{user10}}", "clinician"});
    s.steps.push_back(RequestStep{"View patient list", "GET", "/api/patient", {}, "patients",
                                  false, true});
    LoopStep loop;
    loop.count = 100;
    loop.body.push_back(RequestStep{"View patient", "GET", "/api/patient/{{patients[i]._id}}",
                                    {}, "", true, false});
    s.steps.push_back(std::move(loop));
    s.steps.push_back(LogoutStep{});
    return s;
}

VirtualUserScript make_updaterep100() {
    VirtualUserScript s;
    s.name = "UpdateRep100";
    s.steps.push_back(LoginStep{"admin", "admin"});
    s.steps.push_back(RequestStep{"List repository", "GET", "/api/repository", {}, "items",
                                  false, true});
    LoopStep loop;
    loop.count = 100;
    loop.body.push_back(RequestStep{"Update repository item", "PUT",
                                    "/api/repository/{{items[i]._id}}",
                                    json{{"name", "Updated repository item {{i}}"}}, "", false,
                                    false});
    s.steps.push_back(std::move(loop));
    s.steps.push_back(LogoutStep{});
    return s;
}

bool is_mutation(const RequestStep& r) {
    return (r.method == "POST" || r.method == "PUT" || r.method == "DELETE") &&
           !util::starts_with(r.path_tpl, "/api/auth");
}

void strip_page_loads(std::vector<Step>& steps) {
    std::vector<Step> out;
    for (auto& step : steps) {
        if (std::holds_alternative<PageLoadStep>(step.v)) continue;
        if (auto* loop = std::get_if<LoopStep>(&step.v)) strip_page_loads(loop->body);
        out.push_back(std::move(step));
    }
    steps = std::move(out);
}

void insert_page_loads(std::vector<Step>& steps) {
    std::vector<Step> out;
    for (auto& step : steps) {
        if (auto* loop = std::get_if<LoopStep>(&step.v)) insert_page_loads(loop->body);
        const bool follow_with_page =
            std::holds_alternative<LoginStep>(step.v) ||
            (std::holds_alternative<RequestStep>(step.v) &&
             (is_mutation(std::get<RequestStep>(step.v)) ||
              std::get<RequestStep>(step.v).refresh_point));
        out.push_back(std::move(step));
        if (follow_with_page) out.push_back(PageLoadStep{});
    }
    steps = std::move(out);
}

}  // namespace

VirtualUserScript builtin_script(const std::string& name) {
    if (name == "Add100") return make_add100();
    if (name == "Goal100") return make_goal100();
    if (name == "View100") return make_view100();
    if (name == "UpdateRep100") return make_updaterep100();
    return {};
}

std::vector<std::string> builtin_script_names() {
    return {"Add100", "Goal100", "View100", "UpdateRep100"};
}

VirtualUserScript refresh_mode(const VirtualUserScript& script, RefreshMode mode) {
    VirtualUserScript out = script;
    strip_page_loads(out.steps);
    if (mode == RefreshMode::Refresh) insert_page_loads(out.steps);
    return out;
}

namespace {

std::size_t count_requests(const std::vector<Step>& steps) {
    std::size_t total = 0;
    for (const auto& step : steps) {
        if (std::holds_alternative<LoginStep>(step.v) || std::holds_alternative<LogoutStep>(step.v) ||
            std::holds_alternative<RequestStep>(step.v)) {
            ++total;
        } else if (std::holds_alternative<PageLoadStep>(step.v)) {
            total += api::shell_manifest().size();
        } else if (const auto* loop = std::get_if<LoopStep>(&step.v)) {
            total += static_cast<std::size_t>(loop->count) * count_requests(loop->body);
        }
    }
    return total;
}

}  // namespace

std::size_t expected_requests_per_iteration(const VirtualUserScript& script) {
    return count_requests(script.steps);
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

Scenario preset_scenario(int id) {
    switch (id) {
        case 1: return {"1", {{"Add100", 100}}, 10, 1, RefreshMode::Refresh};
        case 2: return {"2", {{"Goal100", 100}}, 10, 1, RefreshMode::NoRefresh};
        case 3: return {"3", {{"View100", 90}, {"Goal100", 10}}, 10, 1, RefreshMode::Refresh};
        case 4: return {"4", {{"UpdateRep100", 100}}, 10, 1, RefreshMode::Refresh};
        case 5: return {"5", {{"Goal100", 50}, {"View100", 50}}, 10, 1, RefreshMode::Refresh};
        default: return {};
    }
}

std::optional<Scenario> scenario_from_json(const json& j) {
    if (!j.is_object()) return std::nullopt;
    Scenario s;
    s.id = j.value("id", std::string{"custom"});
    s.concurrent_users = j.value("users", 1);
    s.iterations_per_user = j.value("iterations", 1);
    const std::string mode = j.value("mode", std::string{"NoRefresh"});
    if (mode == "Refresh") s.mode = RefreshMode::Refresh;
    else if (mode == "NoRefresh") s.mode = RefreshMode::NoRefresh;
    else return std::nullopt;
    if (!j.contains("population") || !j["population"].is_array()) return std::nullopt;
    int percent_total = 0;
    for (const auto& entry : j["population"]) {
        PopulationEntry p;
        p.script = entry.value("script", std::string{});
        p.percent = entry.value("percent", 0);
        if (builtin_script(p.script).name.empty()) return std::nullopt;
        percent_total += p.percent;
        s.population.push_back(std::move(p));
    }
    if (percent_total != 100 || s.concurrent_users <= 0 || s.iterations_per_user < 0) {
        return std::nullopt;
    }
    return s;
}

json scenario_to_json(const Scenario& scenario) {
    json pop = json::array();
    for (const auto& entry : scenario.population) {
        pop.push_back(json{{"script", entry.script}, {"percent", entry.percent}});
    }
    return json{{"id", scenario.id},
                {"users", scenario.concurrent_users},
                {"iterations", scenario.iterations_per_user},
                {"mode", scenario.mode == RefreshMode::Refresh ? "Refresh" : "NoRefresh"},
                {"population", pop}};
}

std::vector<std::string> realize_population(const Scenario& scenario) {
    const int n = scenario.concurrent_users;
    std::vector<int> counts(scenario.population.size(), 0);
    std::vector<std::pair<int, std::size_t>> remainders;  // (remainder*100, entry)
    int assigned = 0;
    for (std::size_t i = 0; i < scenario.population.size(); ++i) {
        const int exact = scenario.population[i].percent * n;
        counts[i] = exact / 100;
        assigned += counts[i];
        remainders.push_back({exact % 100, i});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < n && k < remainders.size(); ++k) {
        ++counts[remainders[k].second];
        ++assigned;
    }
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (int c = 0; c < counts[i]; ++c) out.push_back(scenario.population[i].script);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run log
// ---------------------------------------------------------------------------

json to_json(const RunEvent& e) {
    json j{{"user", e.user},       {"kind", e.kind},
           {"method", e.method},   {"path", e.path},
           {"label", e.label},     {"status", e.status},
           {"error", e.error},     {"bytes_down", e.bytes_down},
           {"bytes_up", e.bytes_up},
           {"start_ms", e.start_ms},
           {"end_ms", e.end_ms},   {"elapsed_ms", e.elapsed_ms},
           {"ttfb_ms", e.ttfb_ms}};
    if (e.kind == "page") j["requests_in_page"] = e.requests_in_page;
    return j;
}

RunEvent run_event_from_json(const json& j) {
    RunEvent e;
    e.user = j.value("user", 0);
    e.kind = j.value("kind", std::string{});
    e.method = j.value("method", std::string{});
    e.path = j.value("path", std::string{});
    e.label = j.value("label", std::string{});
    e.status = j.value("status", 0);
    e.error = j.value("error", false);
    e.bytes_down = j.value("bytes_down", std::uint64_t{0});
    e.bytes_up = j.value("bytes_up", std::uint64_t{0});
    e.start_ms = j.value("start_ms", 0.0);
    e.end_ms = j.value("end_ms", 0.0);
    e.elapsed_ms = j.value("elapsed_ms", 0.0);
    e.ttfb_ms = j.value("ttfb_ms", 0.0);
    e.requests_in_page = j.value("requests_in_page", 0);
    return e;
}

namespace {

json series_to_json(const ResourceSeries& s) {
    return json{{"present", s.present}, {"min", s.min}, {"avg", s.avg}, {"max", s.max}};
}

ResourceSeries series_from_json(const json& j) {
    ResourceSeries s;
    s.present = j.value("present", false);
    s.min = j.value("min", 0.0);
    s.avg = j.value("avg", 0.0);
    s.max = j.value("max", 0.0);
    return s;
}

}  // namespace

bool save_run_log(const RawRunLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) return false;
    json header{{"type", "header"},
                {"scenario", log.scenario},
                {"backend", log.backend},
                {"mode", log.mode},
                {"user_scripts", log.user_scripts},
                {"started_unix_ms", log.started_unix_ms},
                {"duration_ms", log.duration_ms},
                {"users_launched", log.users_launched},
                {"iterations_completed", log.iterations_completed},
                {"action_errors", log.action_errors},
                {"cpu", series_to_json(log.cpu)},
                {"mem", series_to_json(log.mem)}};
    json samples = json::array();
    for (const auto& s : log.samples) samples.push_back(json{s.t_ms, s.cpu_percent, s.mem_percent});
    header["samples"] = std::move(samples);
    out << header.dump() << '\n';
    for (const auto& event : log.events) out << to_json(event).dump() << '\n';
    return static_cast<bool>(out);
}

std::optional<RawRunLog> load_run_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("type", std::string{}) != "header") {
        return std::nullopt;
    }
    RawRunLog log;
    log.scenario = header.value("scenario", std::string{});
    log.backend = header.value("backend", std::string{});
    log.mode = header.value("mode", std::string{});
    if (header.contains("user_scripts")) {
        log.user_scripts = header["user_scripts"].get<std::vector<std::string>>();
    }
    log.started_unix_ms = header.value("started_unix_ms", std::int64_t{0});
    log.duration_ms = header.value("duration_ms", 0.0);
    log.users_launched = header.value("users_launched", 0);
    log.iterations_completed = header.value("iterations_completed", 0);
    log.action_errors = header.value("action_errors", 0);
    if (header.contains("cpu")) log.cpu = series_from_json(header["cpu"]);
    if (header.contains("mem")) log.mem = series_from_json(header["mem"]);
    if (header.contains("samples") && header["samples"].is_array()) {
        for (const auto& s : header["samples"]) {
            if (s.is_array() && s.size() == 3) {
                log.samples.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
            }
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;
        log.events.push_back(run_event_from_json(j));
    }
    return log;
}

int max_overlapping_users(const RawRunLog& log) {
    struct Edge {
        double t;
        int delta;
        int user;
    };
    std::vector<Edge> edges;
    for (const auto& event : log.events) {
        if (event.kind != "request") continue;
        edges.push_back({event.start_ms, +1, event.user});
        edges.push_back({event.end_ms, -1, event.user});
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.delta < b.delta;  // close before open at equal times
    });
    std::map<int, int> depth;
    int active_users = 0;
    int best = 0;
    for (const auto& edge : edges) {
        int& d = depth[edge.user];
        if (edge.delta > 0) {
            if (d == 0) ++active_users;
            ++d;
        } else {
            --d;
            if (d == 0) --active_users;
        }
        best = std::max(best, active_users);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace {

// Fixed request-header overhead so byte totals stay deterministic across
// runs (actual Host/User-Agent lengths vary with the ephemeral port).
constexpr std::uint64_t kRequestHeaderOverhead = 120;

struct UserRun {
    int user = 0;
    int iteration = 0;
    int loop_index = 0;
    std::map<std::string, json> vars;
    std::map<std::string, std::string> etags;  // shell cache
    std::string cookie;
    std::vector<RunEvent> events;
    int action_errors = 0;
    int iterations_completed = 0;
    bool iteration_failed = false;
};

std::uint64_t header_bytes(const httplib::Headers& headers) {
    std::uint64_t total = 19;  // status line + trailing CRLF
    for (const auto& [key, value] : headers) total += key.size() + value.size() + 4;
    return total;
}

/// Resolves one {{token}}: builtins (user, user10, i, iteration), plain
/// variables, and array element access "name[idx].field" with idx a number
/// or "i" (wraps modulo the array length).
std::string resolve_token(const std::string& token, const UserRun& ctx) {
    if (token == "user") return std::to_string(ctx.user);
    if (token == "user10") return std::to_string(ctx.user % 10 + 1);
    if (token == "i") return std::to_string(ctx.loop_index);
    if (token == "iteration") return std::to_string(ctx.iteration);

    std::string name = token;
    std::string index;
    std::string field;
    if (auto bracket = token.find('['); bracket != std::string::npos) {
        auto close = token.find(']', bracket);
        if (close == std::string::npos) return {};
        name = token.substr(0, bracket);
        index = token.substr(bracket + 1, close - bracket - 1);
        if (close + 1 < token.size() && token[close + 1] == '.') field = token.substr(close + 2);
    } else if (auto dot = token.find('.'); dot != std::string::npos) {
        name = token.substr(0, dot);
        field = token.substr(dot + 1);
    }
    auto it = ctx.vars.find(name);
    if (it == ctx.vars.end()) return {};
    json value = it->second;
    if (!index.empty()) {
        if (!value.is_array() || value.empty()) return {};
        std::size_t idx = index == "i" ? static_cast<std::size_t>(ctx.loop_index)
                                       : static_cast<std::size_t>(std::stoul(index));
        value = value[idx % value.size()];
    }
    if (!field.empty()) {
        if (!value.is_object() || !value.contains(field)) return {};
        value = value[field];
    }
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
}

/// Expands {{...}} templates; an unresolvable token yields failed=true.
std::string resolve_template(const std::string& tpl, const UserRun& ctx, bool& failed) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        auto open = tpl.find("{{", pos);
        if (open == std::string::npos) {
            out += tpl.substr(pos);
            break;
        }
        auto close = tpl.find("}}", open);
        if (close == std::string::npos) {
            out += tpl.substr(pos);
            break;
        }
        out += tpl.substr(pos, open - pos);
        const std::string token = tpl.substr(open + 2, close - open - 2);
        const std::string resolved = resolve_token(token, ctx);
        if (resolved.empty()) failed = true;
        out += resolved;
        pos = close + 2;
    }
    return out;
}

json resolve_body(const json& tpl, const UserRun& ctx, bool& failed) {
    if (tpl.is_string()) return resolve_template(tpl.get<std::string>(), ctx, failed);
    if (tpl.is_array()) {
        json out = json::array();
        for (const auto& element : tpl) out.push_back(resolve_body(element, ctx, failed));
        return out;
    }
    if (tpl.is_object()) {
        json out = json::object();
        for (auto& [k, v] : tpl.items()) out[k] = resolve_body(v, ctx, failed);
        return out;
    }
    return tpl;
}

class Worker {
public:
    Worker(int user, const VirtualUserScript& script, int iterations, const std::string& base_url,
           double run_epoch_ms, double think_scale)
        : script_(script),
          iterations_(iterations),
          client_(base_url),
          run_epoch_ms_(run_epoch_ms),
          think_scale_(think_scale) {
        ctx_.user = user;
        client_.set_keep_alive(true);
        client_.set_connection_timeout(10);
        client_.set_read_timeout(60);
        shell_paths_ = api::shell_manifest();
    }

    UserRun run() {
        for (int it = 0; it < iterations_; ++it) {
            ctx_.iteration = it;
            ctx_.iteration_failed = false;
            run_steps(script_.steps);
            if (!ctx_.iteration_failed) ++ctx_.iterations_completed;
        }
        return std::move(ctx_);
    }

private:
    double now_rel() const { return util::steady_millis() - run_epoch_ms_; }

    httplib::Headers request_headers() const {
        httplib::Headers headers;
        if (!ctx_.cookie.empty()) headers.emplace("Cookie", ctx_.cookie);
        return headers;
    }

    /// Issues one HTTP exchange and records its request event.
    RunEvent do_request(const std::string& label, const std::string& method,
                        const std::string& path, const json* body, bool capture_body,
                        std::string* body_out, const std::string& extra_header_name = "",
                        const std::string& extra_header_value = "") {
        RunEvent event;
        event.user = ctx_.user;
        event.kind = "request";
        event.method = method;
        event.path = path;
        event.label = label;

        httplib::Headers headers = request_headers();
        if (!extra_header_name.empty()) headers.emplace(extra_header_name, extra_header_value);

        std::string payload;
        if (body != nullptr) payload = body->dump();
        event.bytes_up = method.size() + path.size() + payload.size() + kRequestHeaderOverhead +
                         (ctx_.cookie.empty() ? 0 : ctx_.cookie.size() + 8);

        const double t0 = now_rel();
        event.start_ms = t0;
        double ttfb = -1;
        std::uint64_t body_bytes = 0;
        httplib::Result result{nullptr, httplib::Error::Success};
        if (method == "GET") {
            std::string captured;
            result = client_.Get(
                path, headers,
                [&](const httplib::Response&) {
                    ttfb = now_rel() - t0;
                    return true;
                },
                [&](const char* data, std::size_t n) {
                    body_bytes += n;
                    if (capture_body) captured.append(data, n);
                    return true;
                });
            if (capture_body && body_out != nullptr) *body_out = std::move(captured);
        } else if (method == "POST") {
            result = client_.Post(path, headers, payload, "application/json");
        } else if (method == "PUT") {
            result = client_.Put(path, headers, payload, "application/json");
        } else if (method == "DELETE") {
            result = client_.Delete(path, headers);
        }
        event.end_ms = now_rel();
        event.elapsed_ms = event.end_ms - event.start_ms;

        if (result) {
            event.status = result->status;
            event.error = result->status >= 400;
            if (method != "GET") {
                body_bytes = result->body.size();
                if (body_out != nullptr) *body_out = result->body;
            }
            event.bytes_down = body_bytes + header_bytes(result->headers);
            if (result->has_header("Set-Cookie")) {
                const std::string cookie = result->get_header_value("Set-Cookie");
                ctx_.cookie = cookie.substr(0, cookie.find(';'));
            }
            if (result->has_header("ETag")) {
                ctx_.etags[path] = result->get_header_value("ETag");
            }
        } else {
            event.status = 0;
            event.error = true;
        }
        event.ttfb_ms = ttfb >= 0 ? ttfb : event.elapsed_ms;
        ctx_.events.push_back(event);
        return event;
    }

    void action_error() {
        ++ctx_.action_errors;
        ctx_.iteration_failed = true;
    }

    void do_page_load() {
        RunEvent page;
        page.user = ctx_.user;
        page.kind = "page";
        page.method = "GET";
        page.path = "/app/";
        page.label = "Page load";
        page.start_ms = now_rel();
        page.status = 200;
        double first_ttfb = -1;
        for (const auto& path : shell_paths_) {
            std::string etag;
            if (auto it = ctx_.etags.find(path); it != ctx_.etags.end()) etag = it->second;
            RunEvent sub = do_request("Shell", "GET", path, nullptr, false, nullptr,
                                      etag.empty() ? "" : "If-None-Match", etag);
            if (first_ttfb < 0) first_ttfb = sub.ttfb_ms;
            page.bytes_down += sub.bytes_down;
            page.bytes_up += sub.bytes_up;
            if (sub.error) {
                page.error = true;
                page.status = sub.status;
            }
            ++page.requests_in_page;
        }
        page.end_ms = now_rel();
        page.elapsed_ms = page.end_ms - page.start_ms;
        page.ttfb_ms = first_ttfb >= 0 ? first_ttfb : 0;
        ctx_.events.push_back(page);
    }

    void run_steps(const std::vector<Step>& steps) {
        for (const auto& step : steps) {
            if (ctx_.iteration_failed) return;
            std::visit([this](const auto& s) { this->execute(s); }, step.v);
        }
    }

    void execute(const LoginStep& step) {
        bool failed = false;
        const std::string username = resolve_template(step.username_tpl, ctx_, failed);
        json body{{"username", username}, {"password", step.password}};
        ctx_.cookie.clear();
        std::string response;
        RunEvent event = do_request("Log in", "POST", "/api/auth/login", &body, false, &response);
        if (failed || event.error) action_error();
    }

    void execute(const LogoutStep&) {
        do_request("Log out", "POST", "/api/auth/logout", nullptr, false, nullptr);
        ctx_.cookie.clear();
    }

    void execute(const PageLoadStep&) { do_page_load(); }

    void execute(const RequestStep& step) {
        bool failed = false;
        const std::string path = resolve_template(step.path_tpl, ctx_, failed);
        json body;
        const json* body_ptr = nullptr;
        if (!step.body_tpl.is_null()) {
            body = resolve_body(step.body_tpl, ctx_, failed);
            body_ptr = &body;
        }
        if (failed) {
            action_error();
            return;
        }
        const bool capture = !step.extract_to.empty();
        std::string response;
        RunEvent event = do_request(step.label, step.method, path, body_ptr, capture, &response);
        if (capture) {
            json parsed = json::parse(response, nullptr, false);
            if (event.error || parsed.is_discarded()) {
                action_error();
                return;
            }
            ctx_.vars[step.extract_to] = std::move(parsed);
        } else if (event.error && step.required) {
            action_error();
        }
    }

    void execute(const ThinkStep& step) {
        const auto delay = static_cast<int>(step.ms * think_scale_);
        if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }

    void execute(const LoopStep& loop) {
        const int saved = ctx_.loop_index;
        for (int i = 0; i < loop.count && !ctx_.iteration_failed; ++i) {
            ctx_.loop_index = i;
            run_steps(loop.body);
        }
        ctx_.loop_index = saved;
    }

    VirtualUserScript script_;
    int iterations_;
    httplib::Client client_;
    double run_epoch_ms_;
    double think_scale_;
    std::vector<std::string> shell_paths_;
    UserRun ctx_;
};

}  // namespace

bool ResourceSampler::sample(double& cpu_percent, double& mem_percent) {
    auto stat = util::read_file("/proc/stat");
    auto meminfo = util::read_file("/proc/meminfo");
    if (!stat || !meminfo) return false;

    std::uint64_t total = 0, idle = 0;
    {
        auto line_end = stat->find('\n');
        auto fields = util::split(util::trim(stat->substr(0, line_end)), ' ');
        std::vector<std::uint64_t> values;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (fields[i].empty()) continue;
            values.push_back(std::stoull(fields[i]));
        }
        if (values.size() < 5) return false;
        for (auto v : values) total += v;
        idle = values[3] + values[4];  // idle + iowait
    }
    std::uint64_t mem_total = 0, mem_available = 0;
    for (const auto& line : util::split(*meminfo, '\n')) {
        auto fields = util::split(line, ':');
        if (fields.size() != 2) continue;
        if (fields[0] == "MemTotal") mem_total = std::stoull(util::trim(fields[1]));
        if (fields[0] == "MemAvailable") mem_available = std::stoull(util::trim(fields[1]));
    }
    if (mem_total == 0) return false;
    mem_percent = 100.0 * (1.0 - static_cast<double>(mem_available) / static_cast<double>(mem_total));

    if (!primed_) {
        last_total_ = total;
        last_idle_ = idle;
        primed_ = true;
        return false;  // need a delta
    }
    const auto d_total = total - last_total_;
    const auto d_idle = idle - last_idle_;
    last_total_ = total;
    last_idle_ = idle;
    if (d_total == 0) return false;
    cpu_percent = 100.0 * (1.0 - static_cast<double>(d_idle) / static_cast<double>(d_total));
    return true;
}

RunOutcome run_scenario(const Scenario& scenario, const std::string& base_url,
                        const RunOptions& options) {
    RunOutcome outcome;
    RawRunLog& log = outcome.log;
    log.scenario = scenario.id;
    log.mode = scenario.mode == RefreshMode::Refresh ? "Refresh" : "NoRefresh";

    // Preflight: target reachable?
    {
        httplib::Client probe(base_url);
        probe.set_connection_timeout(5);
        auto root = probe.Get("/");
        if (!root) {
            outcome.error = {RunError::Kind::TargetUnreachable, "cannot reach " + base_url};
            return outcome;
        }
        // Seed preconditions per script.
        auto require_seed = [&](const char* path, std::size_t minimum) {
            auto res = probe.Get(path);
            if (!res || res->status != 200) return false;
            json rows = json::parse(res->body, nullptr, false);
            return rows.is_array() && rows.size() >= minimum;
        };
        for (const auto& entry : scenario.population) {
            if ((entry.script == "View100" && !require_seed("/api/patient", 100)) ||
                (entry.script == "Goal100" && !require_seed("/api/patient", 1)) ||
                (entry.script == "UpdateRep100" && !require_seed("/api/repository", 100))) {
                outcome.error = {RunError::Kind::SeedMissing,
                                 "seed data missing for script " + entry.script};
                return outcome;
            }
        }
    }

    log.user_scripts = realize_population(scenario);
    log.users_launched = scenario.concurrent_users;
    log.started_unix_ms = util::unix_millis();

    const double epoch = util::steady_millis();
    const int n = scenario.concurrent_users;
    std::vector<UserRun> results(static_cast<std::size_t>(n));
    std::latch start_line(n);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) {
        const std::string script_name = log.user_scripts[static_cast<std::size_t>(u)];
        threads.emplace_back([&, u, script_name] {
            VirtualUserScript script = refresh_mode(builtin_script(script_name), scenario.mode);
            Worker worker(u, script, scenario.iterations_per_user, base_url, epoch,
                          options.think_scale);
            start_line.arrive_and_wait();
            results[static_cast<std::size_t>(u)] = worker.run();
        });
    }

    std::atomic<bool> sampling{options.sample_resources};
    std::thread sampler_thread;
    std::vector<ResourceSample> samples;
    if (options.sample_resources) {
        sampler_thread = std::thread([&] {
            ResourceSampler sampler;
            double cpu = 0, mem = 0;
            while (sampling.load()) {
                if (sampler.sample(cpu, mem)) {
                    samples.push_back({util::steady_millis() - epoch, cpu, mem});
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(options.sample_interval_ms));
            }
        });
    }

    for (auto& t : threads) t.join();
    log.duration_ms = util::steady_millis() - epoch;
    sampling.store(false);
    if (sampler_thread.joinable()) sampler_thread.join();
    log.samples = std::move(samples);

    auto fold_series = [&log](auto pick) {
        ResourceSeries series;
        if (log.samples.empty()) return series;
        series.present = true;
        series.min = series.max = pick(log.samples.front());
        double sum = 0;
        for (const auto& s : log.samples) {
            const double v = pick(s);
            series.min = std::min(series.min, v);
            series.max = std::max(series.max, v);
            sum += v;
        }
        series.avg = sum / static_cast<double>(log.samples.size());
        return series;
    };
    log.cpu = fold_series([](const ResourceSample& s) { return s.cpu_percent; });
    log.mem = fold_series([](const ResourceSample& s) { return s.mem_percent; });

    for (auto& result : results) {
        log.iterations_completed += result.iterations_completed;
        log.action_errors += result.action_errors;
        for (auto& event : result.events) log.events.push_back(std::move(event));
    }
    return outcome;
}

}  // namespace vre::loadgen
