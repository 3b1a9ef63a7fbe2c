#include "vre/normalized_store.hpp"

#include <algorithm>

#include "vre/entities.hpp"

namespace vre::store {

namespace {

constexpr const char* kKindTables[] = {"content_video", "content_audio", "content_text",
                                       "content_other"};

std::string kind_table_for(const std::string& kind_name) {
    if (kind_name == "Video") return "content_video";
    if (kind_name == "Audio") return "content_audio";
    if (kind_name == "Text") return "content_text";
    return "content_other";
}

std::string kind_for_table(const std::string& table) {
    if (table == "content_video") return "Video";
    if (table == "content_audio") return "Audio";
    if (table == "content_text") return "Text";
    return "Other";
}

}  // namespace

const TableDef* NormalizedSchema::table(std::string_view name) const {
    for (const auto& t : tables) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const NormalizedSchema& NormalizedStore::normalized_schema() {
    static const NormalizedSchema schema = [] {
        NormalizedSchema s;
        for (const auto& cs : all_schemas()) {
            TableDef t;
            t.name = cs.name;
            t.primary_key = "_id";
            for (const auto& f : cs.fields) {
                if (cs.name == "Contents" && f.name == "kind") continue;    // child tables
                if (cs.name == "Goals" && f.name == "comments") continue;   // goal_comments
                t.columns.push_back({f.name, f.required});
            }
            t.foreign_keys = cs.foreign_keys;
            s.tables.push_back(std::move(t));
        }
        for (const char* name : kKindTables) {
            TableDef t;
            t.name = name;
            t.primary_key = "content_id";
            t.columns.push_back({"content_id", true});
            t.foreign_keys.push_back({"content_id", "Contents"});
            s.tables.push_back(std::move(t));
        }
        TableDef comments;
        comments.name = "goal_comments";
        comments.primary_key = "";
        comments.columns = {{"goal_id", true}, {"ord", true}, {"author_id", true},
                            {"text", true},   {"timestamp", false}};
        comments.foreign_keys = {{"goal_id", "Goals"}, {"author_id", "Accounts"}};
        s.tables.push_back(std::move(comments));
        return s;
    }();
    return schema;
}

NormalizedStore::NormalizedStore(const std::string& data_dir) : data_dir_(data_dir) {
    for (const char* name : model::kCollections) tables_[name];
    for (const char* name : kKindTables) child_tables_[name];
    child_tables_["goal_comments"];
    if (!data_dir_.empty()) {
        log_path_ = std::filesystem::path(data_dir_) / std::string(journal_filename(kind()));
        for (const auto& record : replay_journal(log_path_)) {
            if (record.op == "put") {
                upsert_locked(record.collection, record.id, record.doc);
                ids_.observe(record.id);
            } else if (record.op == "del") {
                erase_locked(record.collection, record.id);
            }
        }
        log_.open(log_path_);
    }
}

NormalizedStore::~NormalizedStore() { close(); }

bool NormalizedStore::exists_locked(const std::string& collection, const std::string& id) const {
    auto it = tables_.find(collection);
    return it != tables_.end() && it->second.index.count(id) > 0;
}

Status NormalizedStore::validate_locked(const std::string& collection, const json& doc,
                                        const EntityId& self_id) const {
    const CollectionSchema* schema = find_schema(collection);
    if (schema == nullptr) return Status::failure(ErrCode::BadRecord, "unknown collection " + collection);
    if (!doc.is_object()) return Status::failure(ErrCode::BadRecord, "document must be an object");

    for (auto& [key, value] : doc.items()) {
        if (key == "_id") continue;
        const FieldSpec* field = schema->field(key);
        if (field == nullptr) {
            return Status::failure(ErrCode::BadRecord, "unknown field " + key);
        }
        if (!value_matches_type(value, field->type)) {
            return Status::failure(ErrCode::BadRecord, "bad value for field " + key);
        }
    }
    for (const auto& field : schema->fields) {
        if (field.required && !doc.contains(field.name)) {
            return Status::failure(ErrCode::BadRecord, "missing field " + field.name);
        }
    }
    if (!schema->exactly_one_of.empty()) {
        int present = 0;
        for (const auto& name : schema->exactly_one_of) {
            if (doc.contains(name)) ++present;
        }
        if (present != 1) {
            return Status::failure(ErrCode::BadRecord, "exactly one of the link fields must be set");
        }
    }
    for (const auto& fk : schema->foreign_keys) {
        auto it = doc.find(fk.field);
        if (it == doc.end()) continue;
        const std::string target = it->get<std::string>();
        if (!exists_locked(fk.references, target)) {
            return Status::failure(ErrCode::ReferentialViolation,
                                   "dangling " + fk.field + " -> " + fk.references);
        }
    }
    if (collection == "Goals") {
        if (auto it = doc.find("comments"); it != doc.end()) {
            for (const auto& c : *it) {
                const std::string author = c.value("author_id", std::string{});
                if (!exists_locked("Accounts", author)) {
                    return Status::failure(ErrCode::ReferentialViolation,
                                           "dangling comment author_id -> Accounts");
                }
            }
        }
    }
    for (const auto& pair : schema->unique_pairs) {
        auto a = doc.find(pair[0]);
        auto b = doc.find(pair[1]);
        if (a == doc.end() || b == doc.end()) continue;
        const auto& rows = tables_.at(collection).rows;
        for (const auto& row : rows) {
            if (row.value("_id", std::string{}) == self_id) continue;
            auto ra = row.find(pair[0]);
            auto rb = row.find(pair[1]);
            if (ra != row.end() && rb != row.end() && *ra == *a && *rb == *b) {
                return Status::failure(ErrCode::DuplicateKey,
                                       "duplicate pair (" + pair[0] + ", " + pair[1] + ")");
            }
        }
    }
    return {};
}

Status NormalizedStore::referenced_by_locked(const std::string& collection,
                                             const EntityId& id) const {
    for (const auto& schema : all_schemas()) {
        for (const auto& fk : schema.foreign_keys) {
            if (fk.references != collection) continue;
            for (const auto& row : tables_.at(schema.name).rows) {
                if (schema.name == collection && row.value("_id", std::string{}) == id) continue;
                auto it = row.find(fk.field);
                if (it != row.end() && it->is_string() && it->get<std::string>() == id) {
                    return Status::failure(ErrCode::ReferentialViolation,
                                           "referenced by " + schema.name + "." + fk.field);
                }
            }
        }
    }
    if (collection == "Accounts") {
        for (const auto& row : child_tables_.at("goal_comments")) {
            if (row.value("author_id", std::string{}) == id) {
                return Status::failure(ErrCode::ReferentialViolation,
                                       "referenced by goal_comments.author_id");
            }
        }
    }
    return {};
}

json NormalizedStore::assemble_locked(const std::string& collection, const json& row) const {
    json doc = row;
    const std::string id = row.value("_id", std::string{});
    if (collection == "Contents") {
        for (const char* table : kKindTables) {
            for (const auto& child : child_tables_.at(table)) {
                if (child.value("content_id", std::string{}) == id) {
                    doc["kind"] = kind_for_table(table);
                    return doc;
                }
            }
        }
        doc["kind"] = "Other";
    } else if (collection == "Goals") {
        std::vector<json> comments;
        for (const auto& c : child_tables_.at("goal_comments")) {
            if (c.value("goal_id", std::string{}) == id) comments.push_back(c);
        }
        std::sort(comments.begin(), comments.end(), [](const json& a, const json& b) {
            return a.value("ord", 0) < b.value("ord", 0);
        });
        json arr = json::array();
        for (const auto& c : comments) {
            json entry{{"author_id", c.value("author_id", std::string{})},
                       {"text", c.value("text", std::string{})},
                       {"timestamp", c.value("timestamp", std::int64_t{0})}};
            arr.push_back(std::move(entry));
        }
        doc["comments"] = std::move(arr);
    }
    return doc;
}

void NormalizedStore::upsert_locked(const std::string& collection, const EntityId& id,
                                    json assembled_doc) {
    json row = std::move(assembled_doc);
    row["_id"] = id;
    if (collection == "Contents") {
        std::string kind_name = row.value("kind", std::string{"Other"});
        row.erase("kind");
        for (const char* table : kKindTables) {
            auto& rows = child_tables_[table];
            rows.erase(std::remove_if(rows.begin(), rows.end(),
                                      [&](const json& r) {
                                          return r.value("content_id", std::string{}) == id;
                                      }),
                       rows.end());
        }
        child_tables_[kind_table_for(kind_name)].push_back(json{{"content_id", id}});
    } else if (collection == "Goals") {
        json comments = json::array();
        if (auto it = row.find("comments"); it != row.end()) {
            comments = *it;
            row.erase("comments");
        }
        auto& rows = child_tables_["goal_comments"];
        rows.erase(std::remove_if(rows.begin(), rows.end(),
                                  [&](const json& r) {
                                      return r.value("goal_id", std::string{}) == id;
                                  }),
                   rows.end());
        int ord = 0;
        for (const auto& c : comments) {
            rows.push_back(json{{"goal_id", id},
                                {"ord", ord++},
                                {"author_id", c.value("author_id", std::string{})},
                                {"text", c.value("text", std::string{})},
                                {"timestamp", c.value("timestamp", std::int64_t{0})}});
        }
    }
    auto& data = tables_[collection];
    auto it = data.index.find(id);
    if (it != data.index.end()) {
        data.rows[it->second] = std::move(row);
    } else {
        data.index[id] = data.rows.size();
        data.rows.push_back(std::move(row));
    }
}

void NormalizedStore::erase_locked(const std::string& collection, const EntityId& id) {
    auto& data = tables_[collection];
    auto it = data.index.find(id);
    if (it == data.index.end()) return;
    std::size_t pos = it->second;
    data.rows.erase(data.rows.begin() + static_cast<std::ptrdiff_t>(pos));
    data.index.erase(it);
    for (auto& [rid, idx] : data.index) {
        if (idx > pos) --idx;
    }
    // Child rows are owned by the parent and go with it.
    if (collection == "Contents") {
        for (const char* table : kKindTables) {
            auto& rows = child_tables_[table];
            rows.erase(std::remove_if(rows.begin(), rows.end(),
                                      [&](const json& r) {
                                          return r.value("content_id", std::string{}) == id;
                                      }),
                       rows.end());
        }
    } else if (collection == "Goals") {
        auto& rows = child_tables_["goal_comments"];
        rows.erase(std::remove_if(rows.begin(), rows.end(),
                                  [&](const json& r) {
                                      return r.value("goal_id", std::string{}) == id;
                                  }),
                   rows.end());
    }
}

Result<EntityId> NormalizedStore::create(const std::string& collection, json doc) {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return {Status::failure(ErrCode::StoreClosed, "store closed")};
    if (doc.is_object()) {
        // Null optional fields mean "absent".
        for (auto it = doc.begin(); it != doc.end();) {
            if (it.value().is_null()) {
                it = doc.erase(it);
            } else {
                ++it;
            }
        }
    }
    EntityId id;
    if (auto it = doc.find("_id"); it != doc.end() && it->is_string() && !it->get<std::string>().empty()) {
        id = it->get<std::string>();
        if (tables_[collection].index.count(id) > 0) {
            return {Status::failure(ErrCode::DuplicateKey, "duplicate _id " + id)};
        }
        doc.erase("_id");
    }
    if (Status s = validate_locked(collection, doc, id); !s.ok()) return {s};
    if (collection == "Goals" && !doc.contains("comments")) doc["comments"] = json::array();
    if (id.empty()) {
        id = ids_.next();
    } else {
        ids_.observe(id);
    }
    doc["_id"] = id;
    upsert_locked(collection, id, doc);
    log_.append({collection, "put", id, assemble_locked(collection, tables_[collection].rows[tables_[collection].index[id]])});
    log_.flush();
    return {{}, id};
}

Result<json> NormalizedStore::read(const std::string& collection, const EntityId& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto cit = tables_.find(collection);
    if (cit == tables_.end()) return {Status::failure(ErrCode::BadRecord, "unknown collection")};
    auto it = cit->second.index.find(id);
    if (it == cit->second.index.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    return {{}, assemble_locked(collection, cit->second.rows[it->second])};
}

Result<json> NormalizedStore::update(const std::string& collection, const EntityId& id,
                                     const json& patch) {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return {Status::failure(ErrCode::StoreClosed, "store closed")};
    if (!patch.is_object()) return {Status::failure(ErrCode::BadRecord, "patch must be an object")};
    auto cit = tables_.find(collection);
    if (cit == tables_.end()) return {Status::failure(ErrCode::BadRecord, "unknown collection")};
    auto it = cit->second.index.find(id);
    if (it == cit->second.index.end()) return {Status::failure(ErrCode::NotFound, "no such record")};

    json current = assemble_locked(collection, cit->second.rows[it->second]);
    json updated = current;
    for (auto& [key, value] : patch.items()) {
        if (key == "_id") continue;
        if (value.is_null()) {
            updated.erase(key);
        } else {
            updated[key] = value;
        }
    }
    if (collection == "Goals" && !updated.contains("comments")) updated["comments"] = json::array();
    if (updated == current) return {{}, updated};  // no-op patch, no version bump
    json to_check = updated;
    to_check.erase("_id");
    if (Status s = validate_locked(collection, to_check, id); !s.ok()) return {s};
    upsert_locked(collection, id, updated);
    log_.append({collection, "put", id, updated});
    log_.flush();
    return {{}, std::move(updated)};
}

Result<json> NormalizedStore::remove(const std::string& collection, const EntityId& id) {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return {Status::failure(ErrCode::StoreClosed, "store closed")};
    auto cit = tables_.find(collection);
    if (cit == tables_.end()) return {Status::failure(ErrCode::BadRecord, "unknown collection")};
    auto it = cit->second.index.find(id);
    if (it == cit->second.index.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    if (Status s = referenced_by_locked(collection, id); !s.ok()) return {s};
    json removed = assemble_locked(collection, cit->second.rows[it->second]);
    erase_locked(collection, id);
    log_.append({collection, "del", id, {}});
    log_.flush();
    return {{}, std::move(removed)};
}

std::vector<json> NormalizedStore::list(const std::string& collection) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto cit = tables_.find(collection);
    if (cit == tables_.end()) return {};
    std::vector<json> out;
    out.reserve(cit->second.rows.size());
    for (const auto& row : cit->second.rows) out.push_back(assemble_locked(collection, row));
    return out;
}

std::vector<json> NormalizedStore::query(const std::string& collection,
                                         const json& predicate) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto cit = tables_.find(collection);
    if (cit == tables_.end()) return {};
    std::vector<json> out;
    for (const auto& row : cit->second.rows) {
        json doc = assemble_locked(collection, row);
        if (matches_predicate(doc, predicate)) out.push_back(std::move(doc));
    }
    return out;
}

EntityId NormalizedStore::fresh_id() { return ids_.next(); }

void NormalizedStore::flush() {
    std::lock_guard<std::mutex> lock(mu_);
    log_.flush();
}

void NormalizedStore::close() {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return;
    log_.flush();
    log_.close();
    closed_ = true;
}

std::vector<std::string> NormalizedStore::table_names() const {
    std::vector<std::string> out;
    for (const auto& t : normalized_schema().tables) out.push_back(t.name);
    return out;
}

std::vector<json> NormalizedStore::raw_table(const std::string& table) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = tables_.find(table); it != tables_.end()) return it->second.rows;
    if (auto it = child_tables_.find(table); it != child_tables_.end()) return it->second;
    return {};
}

}  // namespace vre::store
