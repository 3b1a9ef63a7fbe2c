#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vre/ids.hpp"
#include "vre/json.hpp"

namespace vre::model {

/// The eleven stored collections, exactly as named by the platform.
inline constexpr std::array<const char*, 11> kCollections = {
    "Accounts",   "Administrators", "Categories",  "Clinicians", "CliniciansPatients", "Contents",
    "Goals",      "Information",    "Patients",    "TreatmentContent", "Treatments"};

bool is_collection(std::string_view name);

enum class Role { Administrator, Clinician, Patient };
enum class Term { Short, Long };
enum class ContentKind { Video, Audio, Text, Other };

std::string to_string(Role r);
std::string to_string(Term t);
std::string to_string(ContentKind k);
std::optional<Role> role_from_string(std::string_view s);
std::optional<Term> term_from_string(std::string_view s);
std::optional<ContentKind> content_kind_from_string(std::string_view s);

/// Picks the content kind from a MIME type ("video/mp4" -> Video, ...).
ContentKind content_kind_from_media_type(std::string_view media_type);

struct Account {
    EntityId id;
    std::string username;
    std::string salt;
    std::string password_hash;
    Role role = Role::Patient;
    std::string scheme;  // empty = pbkdf2_sha256; "legacy_sha256_concat" for imports
};

struct Administrator {
    EntityId id;
    EntityId account_id;
    std::string display_name;
};

struct Clinician {
    EntityId id;
    EntityId account_id;
    std::string display_name;
};

struct Patient {
    EntityId id;
    EntityId account_id;
    std::string display_name;
    std::map<std::string, std::string> interface_config;
};

struct ClinicianPatientLink {
    EntityId id;
    EntityId clinician_id;
    EntityId patient_id;
};

struct GoalComment {
    EntityId author_id;
    std::string text;
    std::int64_t timestamp = 0;
};

struct Goal {
    EntityId id;
    EntityId patient_id;
    std::string description;
    Term term = Term::Short;
    std::vector<GoalComment> comments;
};

struct Treatment {
    EntityId id;
    EntityId patient_id;
    std::string title;
    std::string description;
    int repetitions_per_day = 0;
};

struct Information {
    EntityId id;
    EntityId patient_id;
    std::string title;
    std::string body;
};

struct Category {
    EntityId id;
    std::string name;
    std::optional<EntityId> parent_id;
};

struct Content {
    EntityId id;
    std::string name;
    std::string media_type;
    std::string patient_description;
    std::string clinician_description;
    EntityId category_id;
    std::string path;
    EntityId creator_id;
    ContentKind kind = ContentKind::Other;
};

/// A content assignment. Exactly one of treatment_id / information_id is set;
/// both kinds live in the TreatmentContent collection.
struct ContentLink {
    EntityId id;
    EntityId treatment_id;
    EntityId information_id;
    EntityId content_id;
};

// Wire serialization: flat documents keyed "_id" plus snake_case field names.
void to_json(json& j, const Account& v);
void from_json(const json& j, Account& v);
void to_json(json& j, const Administrator& v);
void from_json(const json& j, Administrator& v);
void to_json(json& j, const Clinician& v);
void from_json(const json& j, Clinician& v);
void to_json(json& j, const Patient& v);
void from_json(const json& j, Patient& v);
void to_json(json& j, const ClinicianPatientLink& v);
void from_json(const json& j, ClinicianPatientLink& v);
void to_json(json& j, const GoalComment& v);
void from_json(const json& j, GoalComment& v);
void to_json(json& j, const Goal& v);
void from_json(const json& j, Goal& v);
void to_json(json& j, const Treatment& v);
void from_json(const json& j, Treatment& v);
void to_json(json& j, const Information& v);
void from_json(const json& j, Information& v);
void to_json(json& j, const Category& v);
void from_json(const json& j, Category& v);
void to_json(json& j, const Content& v);
void from_json(const json& j, Content& v);
void to_json(json& j, const ContentLink& v);
void from_json(const json& j, ContentLink& v);

/// API-facing copy of a stored document. Account credentials (salt,
/// password_hash, scheme) never leave the server.
json sanitize_for_api(const std::string& collection, json doc);

}  // namespace vre::model
