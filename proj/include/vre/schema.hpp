#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vre/json.hpp"

namespace vre::store {

enum class FieldType { String, NonNegativeInt, RoleName, TermName, KindName, ConfigMap, CommentList };

struct FieldSpec {
    std::string name;
    FieldType type = FieldType::String;
    bool required = true;
};

struct ForeignKey {
    std::string field;
    std::string references;  // target collection
};

/// Structural description of one collection: field set, reference edges and
/// uniqueness rules. The normalized engine enforces all of it; the document
/// engine only checks required-field presence; the validator reports the rest
/// as advisory violations.
struct CollectionSchema {
    std::string name;
    std::vector<FieldSpec> fields;
    std::vector<ForeignKey> foreign_keys;
    std::vector<std::array<std::string, 2>> unique_pairs;
    std::vector<std::string> exactly_one_of;  // empty or a group of fields

    const FieldSpec* field(std::string_view name) const;
};

const std::vector<CollectionSchema>& all_schemas();
const CollectionSchema* find_schema(std::string_view collection);

/// True when the value matches the declared field type.
bool value_matches_type(const json& value, FieldType type);

}  // namespace vre::store
