#include "vre/schema.hpp"

#include "vre/entities.hpp"

namespace vre::store {

const FieldSpec* CollectionSchema::field(std::string_view name) const {
    for (const auto& f : fields) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

const std::vector<CollectionSchema>& all_schemas() {
    static const std::vector<CollectionSchema> schemas = [] {
        std::vector<CollectionSchema> s;

        s.push_back({"Accounts",
                     {{"username"},
                      {"salt"},
                      {"password_hash"},
                      {"role", FieldType::RoleName},
                      {"scheme", FieldType::String, false}},
                     {},
                     {},
                     {}});

        s.push_back({"Administrators",
                     {{"account_id"}, {"display_name"}},
                     {{"account_id", "Accounts"}},
                     {},
                     {}});

        s.push_back({"Categories",
                     {{"name"}, {"parent_id", FieldType::String, false}},
                     {{"parent_id", "Categories"}},
                     {},
                     {}});

        s.push_back({"Clinicians",
                     {{"account_id"}, {"display_name"}},
                     {{"account_id", "Accounts"}},
                     {},
                     {}});

        s.push_back({"CliniciansPatients",
                     {{"clinician_id"}, {"patient_id"}},
                     {{"clinician_id", "Clinicians"}, {"patient_id", "Patients"}},
                     {{{"clinician_id", "patient_id"}}},
                     {}});

        s.push_back({"Contents",
                     {{"name"},
                      {"media_type"},
                      {"patient_description"},
                      {"clinician_description"},
                      {"category_id"},
                      {"path"},
                      {"creator_id"},
                      {"kind", FieldType::KindName}},
                     {{"category_id", "Categories"}, {"creator_id", "Accounts"}},
                     {},
                     {}});

        s.push_back({"Goals",
                     {{"patient_id"},
                      {"description"},
                      {"term", FieldType::TermName},
                      {"comments", FieldType::CommentList, false}},
                     {{"patient_id", "Patients"}},
                     {},
                     {}});

        s.push_back({"Information",
                     {{"patient_id"}, {"title"}, {"body"}},
                     {{"patient_id", "Patients"}},
                     {},
                     {}});

        s.push_back({"Patients",
                     {{"account_id"},
                      {"display_name"},
                      {"interface_config", FieldType::ConfigMap, false}},
                     {{"account_id", "Accounts"}},
                     {},
                     {}});

        s.push_back({"TreatmentContent",
                     {{"treatment_id", FieldType::String, false},
                      {"information_id", FieldType::String, false},
                      {"content_id"}},
                     {{"treatment_id", "Treatments"},
                      {"information_id", "Information"},
                      {"content_id", "Contents"}},
                     {{{"treatment_id", "content_id"}}, {{"information_id", "content_id"}}},
                     {"treatment_id", "information_id"}});

        s.push_back({"Treatments",
                     {{"patient_id"},
                      {"title"},
                      {"description"},
                      {"repetitions_per_day", FieldType::NonNegativeInt}},
                     {{"patient_id", "Patients"}},
                     {},
                     {}});

        return s;
    }();
    return schemas;
}

const CollectionSchema* find_schema(std::string_view collection) {
    for (const auto& s : all_schemas()) {
        if (s.name == collection) return &s;
    }
    return nullptr;
}

bool value_matches_type(const json& value, FieldType type) {
    switch (type) {
        case FieldType::String:
            return value.is_string();
        case FieldType::NonNegativeInt:
            return value.is_number_integer() && value.get<std::int64_t>() >= 0;
        case FieldType::RoleName:
            return value.is_string() && model::role_from_string(value.get<std::string>()).has_value();
        case FieldType::TermName:
            return value.is_string() && model::term_from_string(value.get<std::string>()).has_value();
        case FieldType::KindName:
            return value.is_string() &&
                   model::content_kind_from_string(value.get<std::string>()).has_value();
        case FieldType::ConfigMap:
            return value.is_object();
        case FieldType::CommentList: {
            if (!value.is_array()) return false;
            for (const auto& c : value) {
                if (!c.is_object()) return false;
                if (!c.contains("author_id") || !c["author_id"].is_string()) return false;
                if (!c.contains("text") || !c["text"].is_string()) return false;
                if (c.contains("timestamp") && !c["timestamp"].is_number()) return false;
            }
            return true;
        }
    }
    return false;
}

}  // namespace vre::store
