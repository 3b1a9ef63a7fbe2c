#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "vre/journal.hpp"
#include "vre/store.hpp"

namespace vre::store {

/// Flexible-schema engine backed by a single append-only journal file.
///
/// Writes always land in memory immediately (read-your-writes). Durability
/// follows the write concern: Journaled appends and flushes the journal
/// before acknowledging; AcknowledgedUnjournaled stages the record and lets
/// it reach the journal on flush()/close() or once the flush interval has
/// elapsed. crash() models a process loss: staged records are dropped and
/// the store reopens from the journal alone.
class DocumentStore : public Store {
public:
    /// Empty data_dir = memory-only (no journal, crash loses everything).
    explicit DocumentStore(const std::string& data_dir, WriteConcern concern = {});
    ~DocumentStore() override;

    BackendKind kind() const override { return BackendKind::Document; }

    Result<EntityId> create(const std::string& collection, json doc) override;
    Result<json> read(const std::string& collection, const EntityId& id) const override;
    Result<json> update(const std::string& collection, const EntityId& id,
                        const json& patch) override;
    Result<json> remove(const std::string& collection, const EntityId& id) override;
    std::vector<json> list(const std::string& collection) const override;
    std::vector<json> query(const std::string& collection, const json& predicate) const override;

    EntityId fresh_id() override;
    void flush() override;
    void close() override;

    // Test hooks.
    /// Drop staged writes and in-memory state, then recover from the journal.
    void crash();
    std::size_t staged_count() const;
    /// Raw stored document, bypassing API sanitization (debug dump).
    json raw_document(const std::string& collection, const EntityId& id) const;

private:
    struct CollectionData {
        std::vector<json> rows;  // insertion order
        std::unordered_map<EntityId, std::size_t> index;
    };

    Status validate_locked(const std::string& collection, const json& doc) const;
    void journal_locked(JournalRecord record);
    void flush_locked();
    void apply_locked(const JournalRecord& record);

    std::string data_dir_;
    std::filesystem::path journal_path_;
    WriteConcern concern_;
    IdGenerator ids_{BackendKind::Document};

    mutable std::mutex mu_;
    std::map<std::string, CollectionData> collections_;
    std::vector<JournalRecord> staged_;
    JournalWriter journal_;
    std::chrono::steady_clock::time_point last_flush_;
    bool closed_ = false;
};

}  // namespace vre::store
