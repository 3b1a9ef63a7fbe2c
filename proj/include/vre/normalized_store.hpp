#pragma once

#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "vre/journal.hpp"
#include "vre/store.hpp"

namespace vre::store {

struct TableColumn {
    std::string name;
    bool required = true;
};

struct TableDef {
    std::string name;
    std::string primary_key;
    std::vector<TableColumn> columns;
    std::vector<ForeignKey> foreign_keys;
};

/// Relational layout: the eleven collection tables, the content inheritance
/// child tables (one per kind, each holding the parent content id) and the
/// goal_comments child table.
struct NormalizedSchema {
    std::vector<TableDef> tables;

    const TableDef* table(std::string_view name) const;
};

/// Fixed-schema engine with enforced referential integrity, backed by a
/// single append-log file (normalized.db). Every write is validated
/// synchronously and durable before acknowledgment.
///
/// Content kind is realized as child tables inheriting from the content
/// table; goal comments as a goal_comments child table. Both are reassembled
/// inline on read, so the observable document shape matches the document
/// backend exactly.
class NormalizedStore : public Store {
public:
    explicit NormalizedStore(const std::string& data_dir);
    ~NormalizedStore() override;

    BackendKind kind() const override { return BackendKind::Normalized; }

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

    static const NormalizedSchema& normalized_schema();

    // Introspection for tests and the debug dump.
    std::vector<std::string> table_names() const;
    std::vector<json> raw_table(const std::string& table) const;

private:
    struct TableData {
        std::vector<json> rows;  // insertion order
        std::unordered_map<EntityId, std::size_t> index;
    };

    Status validate_locked(const std::string& collection, const json& doc,
                           const EntityId& self_id) const;
    bool exists_locked(const std::string& collection, const std::string& id) const;
    Status referenced_by_locked(const std::string& collection, const EntityId& id) const;
    json assemble_locked(const std::string& collection, const json& row) const;
    void upsert_locked(const std::string& collection, const EntityId& id, json assembled_doc);
    void erase_locked(const std::string& collection, const EntityId& id);

    std::string data_dir_;
    std::filesystem::path log_path_;
    IdGenerator ids_{BackendKind::Normalized};

    mutable std::mutex mu_;
    std::map<std::string, TableData> tables_;
    std::map<std::string, std::vector<json>> child_tables_;
    JournalWriter log_;
    bool closed_ = false;
};

}  // namespace vre::store
