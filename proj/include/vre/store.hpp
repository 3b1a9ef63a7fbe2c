#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vre/ids.hpp"
#include "vre/json.hpp"
#include "vre/schema.hpp"

namespace vre::store {

enum class ErrCode {
    None,
    NotFound,
    ReferentialViolation,  // normalized engine only
    DuplicateKey,
    BadRecord,  // malformed document, missing/unknown fields
    StoreClosed,
};

std::string_view to_string(ErrCode code);

struct Status {
    ErrCode code = ErrCode::None;
    std::string detail;

    bool ok() const { return code == ErrCode::None; }
    static Status failure(ErrCode code, std::string detail) { return {code, std::move(detail)}; }
};

template <class T>
struct Result {
    Status status;
    T value{};

    bool ok() const { return status.ok(); }
};

enum class WriteConcernMode { Journaled, AcknowledgedUnjournaled };

/// Durability level at which a write is acknowledged. Journaled writes hit
/// the on-disk log before the ack; acknowledged-unjournaled writes are only
/// staged and reach the log on flush (explicit, on close, or once
/// flush_interval_ms has elapsed since the last flush).
struct WriteConcern {
    WriteConcernMode mode = WriteConcernMode::Journaled;
    int flush_interval_ms = 100;
};

/// Backend-neutral storage contract. Collections are exactly the eleven
/// platform collection names; documents are flat JSON keyed by "_id".
/// All operations are linearizable (one writer lock per store).
class Store {
public:
    virtual ~Store() = default;

    virtual BackendKind kind() const = 0;

    virtual Result<EntityId> create(const std::string& collection, json doc) = 0;
    virtual Result<json> read(const std::string& collection, const EntityId& id) const = 0;
    virtual Result<json> update(const std::string& collection, const EntityId& id,
                                const json& patch) = 0;
    /// Removes the record and returns it.
    virtual Result<json> remove(const std::string& collection, const EntityId& id) = 0;
    virtual std::vector<json> list(const std::string& collection) const = 0;
    /// Equality match on every field of the predicate object.
    virtual std::vector<json> query(const std::string& collection, const json& predicate) const = 0;

    virtual EntityId fresh_id() = 0;
    virtual void flush() = 0;
    virtual void close() = 0;
};

/// Opens a backend over data_dir (journal files live there). An empty
/// data_dir yields a memory-only store with no durability.
std::unique_ptr<Store> open_store(BackendKind kind, const std::string& data_dir,
                                  WriteConcern concern = {});

/// On-disk journal filename for a backend, relative to its data dir.
std::string_view journal_filename(BackendKind kind);

/// Shared predicate matcher: true when every predicate field equals the
/// document's value.
bool matches_predicate(const json& doc, const json& predicate);

}  // namespace vre::store
