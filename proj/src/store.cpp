#include "vre/store.hpp"

#include "vre/document_store.hpp"
#include "vre/normalized_store.hpp"

namespace vre::store {

std::string_view to_string(ErrCode code) {
    switch (code) {
        case ErrCode::None: return "ok";
        case ErrCode::NotFound: return "not found";
        case ErrCode::ReferentialViolation: return "referential violation";
        case ErrCode::DuplicateKey: return "duplicate key";
        case ErrCode::BadRecord: return "bad record";
        case ErrCode::StoreClosed: return "store closed";
    }
    return "unknown";
}

std::unique_ptr<Store> open_store(BackendKind kind, const std::string& data_dir,
                                  WriteConcern concern) {
    if (kind == BackendKind::Document) {
        return std::make_unique<DocumentStore>(data_dir, concern);
    }
    return std::make_unique<NormalizedStore>(data_dir);
}

std::string_view journal_filename(BackendKind kind) {
    return kind == BackendKind::Document ? "document.journal" : "normalized.db";
}

bool matches_predicate(const json& doc, const json& predicate) {
    if (!predicate.is_object()) return false;
    for (auto& [key, value] : predicate.items()) {
        auto it = doc.find(key);
        if (it == doc.end() || *it != value) return false;
    }
    return true;
}

}  // namespace vre::store
