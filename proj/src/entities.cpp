#include "vre/entities.hpp"

#include <algorithm>

#include "vre/util.hpp"

namespace vre::model {

bool is_collection(std::string_view name) {
    return std::find_if(kCollections.begin(), kCollections.end(),
                        [&](const char* c) { return name == c; }) != kCollections.end();
}

std::string to_string(Role r) {
    switch (r) {
        case Role::Administrator: return "Administrator";
        case Role::Clinician: return "Clinician";
        case Role::Patient: return "Patient";
    }
    return "Patient";
}

std::string to_string(Term t) { return t == Term::Short ? "Short" : "Long"; }

std::string to_string(ContentKind k) {
    switch (k) {
        case ContentKind::Video: return "Video";
        case ContentKind::Audio: return "Audio";
        case ContentKind::Text: return "Text";
        case ContentKind::Other: return "Other";
    }
    return "Other";
}

std::optional<Role> role_from_string(std::string_view s) {
    if (s == "Administrator") return Role::Administrator;
    if (s == "Clinician") return Role::Clinician;
    if (s == "Patient") return Role::Patient;
    return std::nullopt;
}

std::optional<Term> term_from_string(std::string_view s) {
    if (s == "Short") return Term::Short;
    if (s == "Long") return Term::Long;
    return std::nullopt;
}

std::optional<ContentKind> content_kind_from_string(std::string_view s) {
    if (s == "Video") return ContentKind::Video;
    if (s == "Audio") return ContentKind::Audio;
    if (s == "Text") return ContentKind::Text;
    if (s == "Other") return ContentKind::Other;
    return std::nullopt;
}

ContentKind content_kind_from_media_type(std::string_view media_type) {
    if (util::starts_with(media_type, "video/")) return ContentKind::Video;
    if (util::starts_with(media_type, "audio/")) return ContentKind::Audio;
    if (util::starts_with(media_type, "text/")) return ContentKind::Text;
    return ContentKind::Other;
}

namespace {

std::string get_str(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

}  // namespace

void to_json(json& j, const Account& v) {
    j = json{{"_id", v.id},
             {"username", v.username},
             {"salt", v.salt},
             {"password_hash", v.password_hash},
             {"role", to_string(v.role)}};
    if (!v.scheme.empty()) j["scheme"] = v.scheme;
}

void from_json(const json& j, Account& v) {
    v.id = get_str(j, "_id");
    v.username = get_str(j, "username");
    v.salt = get_str(j, "salt");
    v.password_hash = get_str(j, "password_hash");
    v.role = role_from_string(get_str(j, "role")).value_or(Role::Patient);
    v.scheme = get_str(j, "scheme");
}

void to_json(json& j, const Administrator& v) {
    j = json{{"_id", v.id}, {"account_id", v.account_id}, {"display_name", v.display_name}};
}

void from_json(const json& j, Administrator& v) {
    v.id = get_str(j, "_id");
    v.account_id = get_str(j, "account_id");
    v.display_name = get_str(j, "display_name");
}

void to_json(json& j, const Clinician& v) {
    j = json{{"_id", v.id}, {"account_id", v.account_id}, {"display_name", v.display_name}};
}

void from_json(const json& j, Clinician& v) {
    v.id = get_str(j, "_id");
    v.account_id = get_str(j, "account_id");
    v.display_name = get_str(j, "display_name");
}

void to_json(json& j, const Patient& v) {
    j = json{{"_id", v.id},
             {"account_id", v.account_id},
             {"display_name", v.display_name},
             {"interface_config", v.interface_config}};
}

void from_json(const json& j, Patient& v) {
    v.id = get_str(j, "_id");
    v.account_id = get_str(j, "account_id");
    v.display_name = get_str(j, "display_name");
    v.interface_config.clear();
    if (auto it = j.find("interface_config"); it != j.end() && it->is_object()) {
        for (auto& [key, value] : it->items()) {
            if (value.is_string()) v.interface_config[key] = value.get<std::string>();
        }
    }
}

void to_json(json& j, const ClinicianPatientLink& v) {
    j = json{{"_id", v.id}, {"clinician_id", v.clinician_id}, {"patient_id", v.patient_id}};
}

void from_json(const json& j, ClinicianPatientLink& v) {
    v.id = get_str(j, "_id");
    v.clinician_id = get_str(j, "clinician_id");
    v.patient_id = get_str(j, "patient_id");
}

void to_json(json& j, const GoalComment& v) {
    j = json{{"author_id", v.author_id}, {"text", v.text}, {"timestamp", v.timestamp}};
}

void from_json(const json& j, GoalComment& v) {
    v.author_id = get_str(j, "author_id");
    v.text = get_str(j, "text");
    v.timestamp = j.value("timestamp", std::int64_t{0});
}

void to_json(json& j, const Goal& v) {
    j = json{{"_id", v.id},
             {"patient_id", v.patient_id},
             {"description", v.description},
             {"term", to_string(v.term)},
             {"comments", v.comments}};
}

void from_json(const json& j, Goal& v) {
    v.id = get_str(j, "_id");
    v.patient_id = get_str(j, "patient_id");
    v.description = get_str(j, "description");
    v.term = term_from_string(get_str(j, "term")).value_or(Term::Short);
    v.comments.clear();
    if (auto it = j.find("comments"); it != j.end() && it->is_array()) {
        v.comments = it->get<std::vector<GoalComment>>();
    }
}

void to_json(json& j, const Treatment& v) {
    j = json{{"_id", v.id},
             {"patient_id", v.patient_id},
             {"title", v.title},
             {"description", v.description},
             {"repetitions_per_day", v.repetitions_per_day}};
}

void from_json(const json& j, Treatment& v) {
    v.id = get_str(j, "_id");
    v.patient_id = get_str(j, "patient_id");
    v.title = get_str(j, "title");
    v.description = get_str(j, "description");
    v.repetitions_per_day = j.value("repetitions_per_day", 0);
}

void to_json(json& j, const Information& v) {
    j = json{{"_id", v.id}, {"patient_id", v.patient_id}, {"title", v.title}, {"body", v.body}};
}

void from_json(const json& j, Information& v) {
    v.id = get_str(j, "_id");
    v.patient_id = get_str(j, "patient_id");
    v.title = get_str(j, "title");
    v.body = get_str(j, "body");
}

void to_json(json& j, const Category& v) {
    j = json{{"_id", v.id}, {"name", v.name}};
    if (v.parent_id) j["parent_id"] = *v.parent_id;
}

void from_json(const json& j, Category& v) {
    v.id = get_str(j, "_id");
    v.name = get_str(j, "name");
    if (j.contains("parent_id") && j["parent_id"].is_string()) {
        v.parent_id = j["parent_id"].get<std::string>();
    } else {
        v.parent_id.reset();
    }
}

void to_json(json& j, const Content& v) {
    j = json{{"_id", v.id},
             {"name", v.name},
             {"media_type", v.media_type},
             {"patient_description", v.patient_description},
             {"clinician_description", v.clinician_description},
             {"category_id", v.category_id},
             {"path", v.path},
             {"creator_id", v.creator_id},
             {"kind", to_string(v.kind)}};
}

void from_json(const json& j, Content& v) {
    v.id = get_str(j, "_id");
    v.name = get_str(j, "name");
    v.media_type = get_str(j, "media_type");
    v.patient_description = get_str(j, "patient_description");
    v.clinician_description = get_str(j, "clinician_description");
    v.category_id = get_str(j, "category_id");
    v.path = get_str(j, "path");
    v.creator_id = get_str(j, "creator_id");
    v.kind = content_kind_from_string(get_str(j, "kind")).value_or(ContentKind::Other);
}

void to_json(json& j, const ContentLink& v) {
    j = json{{"_id", v.id}, {"content_id", v.content_id}};
    if (!v.treatment_id.empty()) j["treatment_id"] = v.treatment_id;
    if (!v.information_id.empty()) j["information_id"] = v.information_id;
}

void from_json(const json& j, ContentLink& v) {
    v.id = get_str(j, "_id");
    v.treatment_id = get_str(j, "treatment_id");
    v.information_id = get_str(j, "information_id");
    v.content_id = get_str(j, "content_id");
}

json sanitize_for_api(const std::string& collection, json doc) {
    if (collection == "Accounts") {
        doc.erase("salt");
        doc.erase("password_hash");
        doc.erase("scheme");
    }
    return doc;
}

}  // namespace vre::model
