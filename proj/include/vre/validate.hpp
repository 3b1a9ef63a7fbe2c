#pragma once

#include <string>
#include <vector>

#include "vre/store.hpp"

namespace vre::model {

struct Violation {
    std::string collection;
    EntityId id;
    std::string field;
    std::string message;
};

struct ValidateOptions {
    /// When set, Content paths must start with this prefix.
    std::string content_root;
};

/// Reports every violated invariant of one record against the store's
/// current contents: dangling references, empty required fields, duplicate
/// link pairs, role mismatches, category cycles. Violations are data, not
/// errors — the document backend accepts records the validator would flag.
std::vector<Violation> validate_record(const store::Store& store, const std::string& collection,
                                       const json& doc, const ValidateOptions& options = {});

/// Validates every record in every collection.
std::vector<Violation> validate_store(const store::Store& store,
                                      const ValidateOptions& options = {});

}  // namespace vre::model
