#include "vre/document_store.hpp"

#include "vre/entities.hpp"

namespace vre::store {

DocumentStore::DocumentStore(const std::string& data_dir, WriteConcern concern)
    : data_dir_(data_dir), concern_(concern), last_flush_(std::chrono::steady_clock::now()) {
    for (const char* name : model::kCollections) collections_[name];
    if (!data_dir_.empty()) {
        journal_path_ = std::filesystem::path(data_dir_) / std::string(journal_filename(kind()));
        for (const auto& record : replay_journal(journal_path_)) apply_locked(record);
        journal_.open(journal_path_);
    }
}

DocumentStore::~DocumentStore() {
    std::lock_guard<std::mutex> lock(mu_);
    if (!closed_) flush_locked();
}

void DocumentStore::apply_locked(const JournalRecord& record) {
    auto& data = collections_[record.collection];
    if (record.op == "put") {
        auto it = data.index.find(record.id);
        if (it != data.index.end()) {
            data.rows[it->second] = record.doc;
        } else {
            data.index[record.id] = data.rows.size();
            data.rows.push_back(record.doc);
        }
    } else if (record.op == "del") {
        auto it = data.index.find(record.id);
        if (it == data.index.end()) return;
        std::size_t pos = it->second;
        data.rows.erase(data.rows.begin() + static_cast<std::ptrdiff_t>(pos));
        data.index.erase(it);
        for (auto& [id, idx] : data.index) {
            if (idx > pos) --idx;
        }
    }
}

Status DocumentStore::validate_locked(const std::string& collection, const json& doc) const {
    if (!doc.is_object()) return Status::failure(ErrCode::BadRecord, "document must be an object");
    // Flexible schema: required fields must be present, nothing more. A
    // collection outside the platform set is simply created as needed.
    const CollectionSchema* schema = find_schema(collection);
    if (schema != nullptr) {
        for (const auto& field : schema->fields) {
            if (field.required && !doc.contains(field.name)) {
                return Status::failure(ErrCode::BadRecord, "missing field " + field.name);
            }
        }
    }
    return {};
}

void DocumentStore::journal_locked(JournalRecord record) {
    apply_locked(record);
    if (concern_.mode == WriteConcernMode::Journaled) {
        journal_.append(record);
        journal_.flush();
        return;
    }
    staged_.push_back(std::move(record));
    auto now = std::chrono::steady_clock::now();
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(now - last_flush_).count();
    if (concern_.flush_interval_ms > 0 && elapsed >= concern_.flush_interval_ms) flush_locked();
}

void DocumentStore::flush_locked() {
    for (const auto& record : staged_) journal_.append(record);
    staged_.clear();
    journal_.flush();
    last_flush_ = std::chrono::steady_clock::now();
}

Result<EntityId> DocumentStore::create(const std::string& collection, json doc) {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return {Status::failure(ErrCode::StoreClosed, "store closed")};
    EntityId id;
    if (auto it = doc.find("_id"); it != doc.end() && it->is_string() && !it->get<std::string>().empty()) {
        id = it->get<std::string>();
        if (collections_[collection].index.count(id) > 0) {
            return {Status::failure(ErrCode::DuplicateKey, "duplicate _id " + id)};
        }
    }
    if (Status s = validate_locked(collection, doc); !s.ok()) return {s};
    // Goal comments are part of the document shape on both backends.
    if (collection == "Goals" && !doc.contains("comments")) doc["comments"] = json::array();
    if (id.empty()) {
        id = ids_.next();
        doc["_id"] = id;
    }
    journal_locked({collection, "put", id, std::move(doc)});
    return {{}, id};
}

Result<json> DocumentStore::read(const std::string& collection, const EntityId& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto cit = collections_.find(collection);
    if (cit == collections_.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    auto it = cit->second.index.find(id);
    if (it == cit->second.index.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    return {{}, cit->second.rows[it->second]};
}

Result<json> DocumentStore::update(const std::string& collection, const EntityId& id,
                                   const json& patch) {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return {Status::failure(ErrCode::StoreClosed, "store closed")};
    if (!patch.is_object()) return {Status::failure(ErrCode::BadRecord, "patch must be an object")};
    auto cit = collections_.find(collection);
    if (cit == collections_.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    auto it = cit->second.index.find(id);
    if (it == cit->second.index.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    json updated = cit->second.rows[it->second];
    for (auto& [key, value] : patch.items()) {
        if (key == "_id") continue;
        updated[key] = value;  // novel fields are simply stored
    }
    if (updated == cit->second.rows[it->second]) return {{}, updated};  // no-op patch
    journal_locked({collection, "put", id, updated});
    return {{}, std::move(updated)};
}

Result<json> DocumentStore::remove(const std::string& collection, const EntityId& id) {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return {Status::failure(ErrCode::StoreClosed, "store closed")};
    auto cit = collections_.find(collection);
    if (cit == collections_.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    auto it = cit->second.index.find(id);
    if (it == cit->second.index.end()) return {Status::failure(ErrCode::NotFound, "no such record")};
    json removed = cit->second.rows[it->second];
    // No cascade: records referencing this one become orphans.
    journal_locked({collection, "del", id, {}});
    return {{}, std::move(removed)};
}

std::vector<json> DocumentStore::list(const std::string& collection) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto cit = collections_.find(collection);
    if (cit == collections_.end()) return {};
    return cit->second.rows;
}

std::vector<json> DocumentStore::query(const std::string& collection, const json& predicate) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto cit = collections_.find(collection);
    if (cit == collections_.end()) return {};
    std::vector<json> out;
    for (const auto& row : cit->second.rows) {
        if (matches_predicate(row, predicate)) out.push_back(row);
    }
    return out;
}

EntityId DocumentStore::fresh_id() { return ids_.next(); }

void DocumentStore::flush() {
    std::lock_guard<std::mutex> lock(mu_);
    flush_locked();
}

void DocumentStore::close() {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) return;
    flush_locked();
    journal_.close();
    closed_ = true;
}

void DocumentStore::crash() {
    std::lock_guard<std::mutex> lock(mu_);
    staged_.clear();
    journal_.close();
    collections_.clear();
    for (const char* name : model::kCollections) collections_[name];
    if (!journal_path_.empty()) {
        for (const auto& record : replay_journal(journal_path_)) apply_locked(record);
        journal_.open(journal_path_);
    }
    last_flush_ = std::chrono::steady_clock::now();
    closed_ = false;
}

std::size_t DocumentStore::staged_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return staged_.size();
}

json DocumentStore::raw_document(const std::string& collection, const EntityId& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto cit = collections_.find(collection);
    if (cit == collections_.end()) return nullptr;
    auto it = cit->second.index.find(id);
    if (it == cit->second.index.end()) return nullptr;
    return cit->second.rows[it->second];
}

}  // namespace vre::store
