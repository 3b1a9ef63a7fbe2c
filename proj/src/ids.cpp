#include "vre/ids.hpp"

#include <algorithm>
#include <charconv>

#include "vre/crypto.hpp"

namespace vre {

std::string_view backend_name(BackendKind kind) {
    return kind == BackendKind::Document ? "document" : "normalized";
}

bool is_document_id(std::string_view id) {
    if (id.size() != 24) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

bool is_normalized_id(std::string_view id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; });
}

IdGenerator::IdGenerator(BackendKind kind) : kind_(kind) {}

EntityId IdGenerator::next() {
    if (kind_ == BackendKind::Document) {
        return crypto::random_hex(24);
    }
    std::lock_guard<std::mutex> lock(mu_);
    return std::to_string(++counter_);
}

void IdGenerator::observe(const EntityId& id) {
    if (kind_ != BackendKind::Normalized) return;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), value);
    if (ec != std::errc() || ptr != id.data() + id.size()) return;
    std::lock_guard<std::mutex> lock(mu_);
    counter_ = std::max(counter_, value);
}

}  // namespace vre
