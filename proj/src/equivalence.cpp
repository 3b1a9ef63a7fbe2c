#include "vre/equivalence.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "vre/entities.hpp"

namespace vre::store {

namespace {

json resolve_refs(const json& value, const std::vector<EntityId>& created) {
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s.size() > 1 && s[0] == '@') {
            std::size_t ordinal = std::stoul(s.substr(1));
            if (ordinal < created.size()) return created[ordinal];
        }
        return value;
    }
    if (value.is_array()) {
        json out = json::array();
        for (const auto& element : value) out.push_back(resolve_refs(element, created));
        return out;
    }
    if (value.is_object()) {
        json out = json::object();
        for (auto& [k, v] : value.items()) out[k] = resolve_refs(v, created);
        return out;
    }
    return value;
}

json normalize_ids(const json& value, const std::unordered_map<std::string, std::size_t>& id_to_ordinal) {
    if (value.is_string()) {
        auto it = id_to_ordinal.find(value.get<std::string>());
        if (it != id_to_ordinal.end()) return "@" + std::to_string(it->second);
        return value;
    }
    if (value.is_array()) {
        json out = json::array();
        for (const auto& element : value) out.push_back(normalize_ids(element, id_to_ordinal));
        return out;
    }
    if (value.is_object()) {
        json out = json::object();
        for (auto& [k, v] : value.items()) out[k] = normalize_ids(v, id_to_ordinal);
        return out;
    }
    return value;
}

/// Runs one op against one store; returns {code, value} with ids normalized.
json run_op(Store& store, const OracleOp& op, std::vector<EntityId>& created,
            std::unordered_map<std::string, std::size_t>& id_to_ordinal) {
    json observed;
    switch (op.kind) {
        case OracleOp::Kind::Create: {
            auto r = store.create(op.collection, resolve_refs(op.payload, created));
            std::size_t ordinal = created.size();
            created.push_back(r.ok() ? r.value : EntityId{});
            if (r.ok()) id_to_ordinal[r.value] = ordinal;
            observed = json{{"code", static_cast<int>(r.status.code)}};
            break;
        }
        case OracleOp::Kind::Read: {
            EntityId id = op.target >= 0 && op.target < static_cast<int>(created.size())
                              ? created[static_cast<std::size_t>(op.target)]
                              : EntityId{"missing"};
            auto r = store.read(op.collection, id);
            observed = json{{"code", static_cast<int>(r.status.code)}};
            if (r.ok()) observed["value"] = normalize_ids(r.value, id_to_ordinal);
            break;
        }
        case OracleOp::Kind::Update: {
            EntityId id = op.target >= 0 && op.target < static_cast<int>(created.size())
                              ? created[static_cast<std::size_t>(op.target)]
                              : EntityId{"missing"};
            auto r = store.update(op.collection, id, resolve_refs(op.payload, created));
            observed = json{{"code", static_cast<int>(r.status.code)}};
            if (r.ok()) observed["value"] = normalize_ids(r.value, id_to_ordinal);
            break;
        }
        case OracleOp::Kind::Delete: {
            EntityId id = op.target >= 0 && op.target < static_cast<int>(created.size())
                              ? created[static_cast<std::size_t>(op.target)]
                              : EntityId{"missing"};
            auto r = store.remove(op.collection, id);
            observed = json{{"code", static_cast<int>(r.status.code)}};
            if (r.ok()) observed["value"] = normalize_ids(r.value, id_to_ordinal);
            break;
        }
        case OracleOp::Kind::List: {
            observed = json{{"code", 0}, {"value", normalize_ids(store.list(op.collection), id_to_ordinal)}};
            break;
        }
        case OracleOp::Kind::Query: {
            auto rows = store.query(op.collection, resolve_refs(op.payload, created));
            observed = json{{"code", 0}, {"value", normalize_ids(rows, id_to_ordinal)}};
            break;
        }
    }
    return observed;
}

}  // namespace

Verdict replay_on_both(const std::vector<OracleOp>& ops, Store& normalized, Store& document) {
    Verdict verdict;
    std::vector<EntityId> created_n, created_d;
    std::unordered_map<std::string, std::size_t> ids_n, ids_d;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        json rn = run_op(normalized, ops[i], created_n, ids_n);
        json rd = run_op(document, ops[i], created_d, ids_d);
        if (rn == rd) continue;
        Divergence d;
        d.op_index = i;
        d.description = "normalized=" + rn.dump() + " document=" + rd.dump();
        const auto code_n = static_cast<ErrCode>(rn.value("code", 0));
        const auto code_d = static_cast<ErrCode>(rd.value("code", 0));
        d.expected_by_design =
            code_n == ErrCode::ReferentialViolation && code_d == ErrCode::None;
        verdict.divergences.push_back(std::move(d));
    }
    return verdict;
}

namespace {

/// Generator bookkeeping: which creations are alive, who references whom,
/// which link pairs exist.
struct GenState {
    struct Rec {
        int ordinal;
        std::string collection;
        std::vector<int> outgoing;  // ordinals this record references
    };

    std::mt19937_64 rng;
    std::vector<Rec> records;                      // by ordinal
    std::map<std::string, std::vector<int>> alive;  // collection -> ordinals
    std::map<int, int> inbound;                     // ordinal -> inbound ref count
    std::set<std::pair<int, int>> clinician_patient_pairs;
    std::set<std::pair<int, int>> content_link_pairs;
    int name_counter = 0;

    int pick(const std::vector<int>& from) {
        std::uniform_int_distribution<std::size_t> dist(0, from.size() - 1);
        return from[dist(rng)];
    }

    bool has(const std::string& collection) const {
        auto it = alive.find(collection);
        return it != alive.end() && !it->second.empty();
    }

    int chance(int percent) {
        std::uniform_int_distribution<int> dist(0, 99);
        return dist(rng) < percent;
    }

    std::string ref(int ordinal) { return "@" + std::to_string(ordinal); }

    void created(const std::string& collection, std::vector<int> outgoing) {
        int ordinal = static_cast<int>(records.size());
        for (int target : outgoing) ++inbound[target];
        records.push_back({ordinal, collection, std::move(outgoing)});
        alive[collection].push_back(ordinal);
    }

    void removed(int ordinal) {
        auto& list = alive[records[static_cast<std::size_t>(ordinal)].collection];
        list.erase(std::remove(list.begin(), list.end(), ordinal), list.end());
        for (int target : records[static_cast<std::size_t>(ordinal)].outgoing) --inbound[target];
    }
};

}  // namespace

std::vector<OracleOp> generate_valid_ops(std::size_t count, std::uint64_t seed) {
    GenState st;
    st.rng.seed(seed);
    std::vector<OracleOp> ops;
    ops.reserve(count);

    auto next_name = [&st](const char* prefix) {
        return std::string(prefix) + std::to_string(st.name_counter++);
    };

    auto gen_create = [&]() -> bool {
        // Collections weighted towards entities that unlock the others.
        static const char* kChoices[] = {"Accounts",  "Accounts",  "Categories", "Patients",
                                         "Clinicians", "Goals",     "Goals",      "Treatments",
                                         "Information", "Contents", "Administrators",
                                         "CliniciansPatients", "TreatmentContent"};
        std::uniform_int_distribution<std::size_t> dist(0, std::size(kChoices) - 1);
        const std::string collection = kChoices[dist(st.rng)];

        json doc;
        std::vector<int> outgoing;
        if (collection == "Accounts") {
            static const char* kRoles[] = {"Administrator", "Clinician", "Patient"};
            doc = {{"username", next_name("user")},
                   {"salt", "c2FsdHNhbHRzYWx0c2FsdA=="},
                   {"password_hash", "aGFzaGhhc2hoYXNoaGFzaA=="},
                   {"role", kRoles[st.rng() % 3]}};
        } else if (collection == "Categories") {
            doc = {{"name", next_name("category")}};
            if (st.has("Categories") && st.chance(50)) {
                int parent = st.pick(st.alive["Categories"]);
                doc["parent_id"] = st.ref(parent);
                outgoing.push_back(parent);
            }
        } else if (collection == "Administrators" || collection == "Clinicians" ||
                   collection == "Patients") {
            if (!st.has("Accounts")) return false;
            int account = st.pick(st.alive["Accounts"]);
            doc = {{"account_id", st.ref(account)}, {"display_name", next_name("person")}};
            outgoing.push_back(account);
            if (collection == "Patients" && st.chance(30)) {
                doc["interface_config"] = {{"buttons", "large"}};
            }
        } else if (collection == "Goals") {
            if (!st.has("Patients")) return false;
            int patient = st.pick(st.alive["Patients"]);
            doc = {{"patient_id", st.ref(patient)},
                   {"description", next_name("goal description ")},
                   {"term", st.chance(50) ? "Short" : "Long"},
                   {"comments", json::array()}};
            outgoing.push_back(patient);
            if (st.has("Accounts") && st.chance(25)) {
                int author = st.pick(st.alive["Accounts"]);
                doc["comments"].push_back(
                    {{"author_id", st.ref(author)}, {"text", "keep going"}, {"timestamp", 1000}});
                outgoing.push_back(author);
            }
        } else if (collection == "Treatments") {
            if (!st.has("Patients")) return false;
            int patient = st.pick(st.alive["Patients"]);
            doc = {{"patient_id", st.ref(patient)},
                   {"title", next_name("treatment")},
                   {"description", "repeat the exercise"},
                   {"repetitions_per_day", static_cast<int>(st.rng() % 10)}};
            outgoing.push_back(patient);
        } else if (collection == "Information") {
            if (!st.has("Patients")) return false;
            int patient = st.pick(st.alive["Patients"]);
            doc = {{"patient_id", st.ref(patient)},
                   {"title", next_name("info")},
                   {"body", "general advice"}};
            outgoing.push_back(patient);
        } else if (collection == "Contents") {
            if (!st.has("Categories") || !st.has("Accounts")) return false;
            int category = st.pick(st.alive["Categories"]);
            int creator = st.pick(st.alive["Accounts"]);
            static const char* kKinds[] = {"Video", "Audio", "Text", "Other"};
            doc = {{"name", next_name("content")},
                   {"media_type", "video/mp4"},
                   {"patient_description", "watch this"},
                   {"clinician_description", "demo recording"},
                   {"category_id", st.ref(category)},
                   {"path", "/repo/" + next_name("file") + ".mp4"},
                   {"creator_id", st.ref(creator)},
                   {"kind", kKinds[st.rng() % 4]}};
            outgoing.push_back(category);
            outgoing.push_back(creator);
        } else if (collection == "CliniciansPatients") {
            if (!st.has("Clinicians") || !st.has("Patients")) return false;
            for (int attempt = 0; attempt < 8; ++attempt) {
                int clinician = st.pick(st.alive["Clinicians"]);
                int patient = st.pick(st.alive["Patients"]);
                if (st.clinician_patient_pairs.count({clinician, patient}) > 0) continue;
                st.clinician_patient_pairs.insert({clinician, patient});
                doc = {{"clinician_id", st.ref(clinician)}, {"patient_id", st.ref(patient)}};
                outgoing = {clinician, patient};
                break;
            }
            if (doc.is_null()) return false;
        } else if (collection == "TreatmentContent") {
            if (!st.has("Contents")) return false;
            bool to_treatment = st.has("Treatments") && (!st.has("Information") || st.chance(60));
            if (!to_treatment && !st.has("Information")) return false;
            const std::string owner_collection = to_treatment ? "Treatments" : "Information";
            for (int attempt = 0; attempt < 8; ++attempt) {
                int owner = st.pick(st.alive[owner_collection]);
                int content = st.pick(st.alive["Contents"]);
                if (st.content_link_pairs.count({owner, content}) > 0) continue;
                st.content_link_pairs.insert({owner, content});
                doc = {{to_treatment ? "treatment_id" : "information_id", st.ref(owner)},
                       {"content_id", st.ref(content)}};
                outgoing = {owner, content};
                break;
            }
            if (doc.is_null()) return false;
        }

        st.created(collection, std::move(outgoing));
        ops.push_back({OracleOp::Kind::Create, collection, std::move(doc), -1});
        return true;
    };

    auto pick_alive_any = [&st]() -> int {
        std::vector<int> all;
        for (const auto& [collection, ordinals] : st.alive) {
            all.insert(all.end(), ordinals.begin(), ordinals.end());
        }
        if (all.empty()) return -1;
        return st.pick(all);
    };

    while (ops.size() < count) {
        const int roll = static_cast<int>(st.rng() % 100);
        if (roll < 45 || st.records.empty()) {
            if (!gen_create()) continue;
        } else if (roll < 65) {
            int target = pick_alive_any();
            if (target < 0) continue;
            ops.push_back({OracleOp::Kind::Read,
                           st.records[static_cast<std::size_t>(target)].collection, {}, target});
        } else if (roll < 80) {
            int target = pick_alive_any();
            if (target < 0) continue;
            const std::string& collection = st.records[static_cast<std::size_t>(target)].collection;
            json patch;
            if (collection == "Accounts") patch = {{"username", next_name("renamed")}};
            else if (collection == "Goals") patch = {{"description", next_name("updated goal ")}};
            else if (collection == "Treatments") patch = {{"title", next_name("updated treatment")}};
            else if (collection == "Information") patch = {{"body", next_name("updated body ")}};
            else if (collection == "Categories") patch = {{"name", next_name("renamed category")}};
            else if (collection == "Contents") patch = {{"name", next_name("renamed content")}};
            else if (collection == "Administrators" || collection == "Clinicians" ||
                     collection == "Patients")
                patch = {{"display_name", next_name("renamed person")}};
            else
                patch = json::object();  // links: identity patch
            ops.push_back({OracleOp::Kind::Update, collection, std::move(patch), target});
        } else if (roll < 88) {
            // Delete an unreferenced record so the normalized engine accepts it.
            std::vector<int> deletable;
            for (const auto& [collection, ordinals] : st.alive) {
                for (int ordinal : ordinals) {
                    auto it = st.inbound.find(ordinal);
                    if (it == st.inbound.end() || it->second == 0) deletable.push_back(ordinal);
                }
            }
            if (deletable.empty()) continue;
            int target = st.pick(deletable);
            const std::string collection = st.records[static_cast<std::size_t>(target)].collection;
            if (collection == "CliniciansPatients" || collection == "TreatmentContent") {
                // Keep pair bookkeeping simple: links stay once created.
                continue;
            }
            st.removed(target);
            ops.push_back({OracleOp::Kind::Delete, collection, {}, target});
        } else if (roll < 95) {
            std::uniform_int_distribution<std::size_t> dist(0, model::kCollections.size() - 1);
            ops.push_back({OracleOp::Kind::List, model::kCollections[dist(st.rng)], {}, -1});
        } else {
            if (st.chance(50)) {
                ops.push_back({OracleOp::Kind::Query, "Goals", json{{"term", "Short"}}, -1});
            } else {
                ops.push_back({OracleOp::Kind::Query, "Accounts", json{{"role", "Clinician"}}, -1});
            }
        }
    }
    return ops;
}

}  // namespace vre::store
