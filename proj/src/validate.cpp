#include "vre/validate.hpp"

#include <set>

#include "vre/entities.hpp"
#include "vre/util.hpp"

namespace vre::model {

namespace {

bool record_exists(const store::Store& store, const std::string& collection, const std::string& id) {
    return store.read(collection, id).ok();
}

void check_role_match(const store::Store& store, const json& doc, Role expected,
                      std::vector<Violation>& out, const std::string& collection,
                      const std::string& id) {
    const std::string account_id = doc.value("account_id", std::string{});
    auto account = store.read("Accounts", account_id);
    if (!account.ok()) return;  // dangling reference reported separately
    if (role_from_string(account.value.value("role", std::string{})) != expected) {
        out.push_back({collection, id, "account_id", "account role mismatch"});
    }
}

}  // namespace

std::vector<Violation> validate_record(const store::Store& store, const std::string& collection,
                                       const json& doc, const ValidateOptions& options) {
    std::vector<Violation> out;
    const store::CollectionSchema* schema = store::find_schema(collection);
    const std::string id = doc.value("_id", std::string{});
    if (schema == nullptr) {
        out.push_back({collection, id, "", "unknown collection"});
        return out;
    }
    if (!doc.is_object()) {
        out.push_back({collection, id, "", "record is not a document"});
        return out;
    }

    for (const auto& field : schema->fields) {
        auto it = doc.find(field.name);
        if (it == doc.end()) {
            if (field.required) out.push_back({collection, id, field.name, "missing required field"});
            continue;
        }
        if (!store::value_matches_type(*it, field.type)) {
            out.push_back({collection, id, field.name, "value does not match field type"});
            continue;
        }
        if (field.required && it->is_string() && it->get<std::string>().empty()) {
            out.push_back({collection, id, field.name, "empty required field"});
        }
    }

    if (!schema->exactly_one_of.empty()) {
        int present = 0;
        for (const auto& name : schema->exactly_one_of) {
            if (doc.contains(name)) ++present;
        }
        if (present != 1) {
            out.push_back({collection, id, "", "exactly one link field must be set"});
        }
    }

    for (const auto& fk : schema->foreign_keys) {
        auto it = doc.find(fk.field);
        if (it == doc.end() || !it->is_string()) continue;
        if (!record_exists(store, fk.references, it->get<std::string>())) {
            out.push_back({collection, id, fk.field, "dangling " + fk.field});
        }
    }

    if (collection == "Goals") {
        if (auto it = doc.find("comments"); it != doc.end() && it->is_array()) {
            for (const auto& c : *it) {
                const std::string author = c.value("author_id", std::string{});
                if (!record_exists(store, "Accounts", author)) {
                    out.push_back({collection, id, "comments", "dangling comment author_id"});
                }
            }
        }
    }

    for (const auto& pair : schema->unique_pairs) {
        auto a = doc.find(pair[0]);
        auto b = doc.find(pair[1]);
        if (a == doc.end() || b == doc.end()) continue;
        for (const auto& row : store.list(collection)) {
            if (row.value("_id", std::string{}) == id) continue;
            auto ra = row.find(pair[0]);
            auto rb = row.find(pair[1]);
            if (ra != row.end() && rb != row.end() && *ra == *a && *rb == *b) {
                out.push_back({collection, id, pair[0], "duplicate link"});
                break;
            }
        }
    }

    if (collection == "Administrators") check_role_match(store, doc, Role::Administrator, out, collection, id);
    if (collection == "Clinicians") check_role_match(store, doc, Role::Clinician, out, collection, id);
    if (collection == "Patients") check_role_match(store, doc, Role::Patient, out, collection, id);

    if (collection == "Categories") {
        // Walk the parent chain; revisiting a node means a cycle.
        std::set<std::string> seen{id};
        json current = doc;
        while (current.contains("parent_id") && current["parent_id"].is_string()) {
            const std::string parent = current["parent_id"].get<std::string>();
            if (seen.count(parent) > 0) {
                out.push_back({collection, id, "parent_id", "category cycle"});
                break;
            }
            seen.insert(parent);
            auto next = store.read("Categories", parent);
            if (!next.ok()) break;
            current = next.value;
        }
    }

    if (collection == "Contents" && !options.content_root.empty()) {
        const std::string path = doc.value("path", std::string{});
        if (!util::starts_with(path, options.content_root)) {
            out.push_back({collection, id, "path", "path outside content root"});
        }
    }

    return out;
}

std::vector<Violation> validate_store(const store::Store& store, const ValidateOptions& options) {
    std::vector<Violation> out;
    for (const char* collection : kCollections) {
        for (const auto& doc : store.list(collection)) {
            auto v = validate_record(store, collection, doc, options);
            out.insert(out.end(), v.begin(), v.end());
        }
    }
    return out;
}

}  // namespace vre::model
