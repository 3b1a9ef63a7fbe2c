#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>

namespace vre {

/// Opaque record identifier. The document backend issues 24 lowercase hex
/// characters, the normalized backend decimal integer strings; the API layer
/// treats both as opaque.
using EntityId = std::string;

enum class BackendKind { Document, Normalized };

std::string_view backend_name(BackendKind kind);

bool is_document_id(std::string_view id);
bool is_normalized_id(std::string_view id);

/// Thread-safe id source, one per store instance.
class IdGenerator {
public:
    explicit IdGenerator(BackendKind kind);

    EntityId next();

    /// Normalized backend: bump the counter past an id seen during journal
    /// replay so fresh ids never collide with recovered rows.
    void observe(const EntityId& id);

private:
    BackendKind kind_;
    std::uint64_t counter_ = 0;
    std::mutex mu_;
};

}  // namespace vre
