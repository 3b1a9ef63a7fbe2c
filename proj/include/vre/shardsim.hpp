#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vre/document_store.hpp"

namespace vre::shardsim {

enum class SimErr { None, MissingShardKey, NoLiveRouter, InvalidSplitPoint, NotFound, Internal };

struct SimStatus {
    SimErr code = SimErr::None;
    std::string detail;
    bool ok() const { return code == SimErr::None; }
};

template <class T>
struct SimResult {
    SimStatus status;
    T value{};
    bool ok() const { return status.ok(); }
};

/// Contiguous key range [lo, hi).
struct KeyRange {
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    std::int64_t hi = std::numeric_limits<std::int64_t>::max();

    bool contains(std::int64_t key) const { return key >= lo && key < hi; }
};

struct ShardKeySpec {
    std::string field = "patient_id";
    std::vector<std::int64_t> split_points;  // sorted, defines split_points.size()+1 ranges
};

struct ClusterSpec {
    ShardKeySpec key;
    int router_count = 2;
    int replica_count = 0;  // passive copies per shard
    std::string collection = "records";
    int per_hop_latency_us = 0;  // injectable simulated transport cost
};

std::optional<ClusterSpec> cluster_spec_from_json(const json& j);
json cluster_spec_to_json(const ClusterSpec& spec);

struct QueryResult {
    SimStatus status;
    std::vector<json> docs;
    int shards_contacted = 0;
    bool ok() const { return status.ok(); }
};

/// Range-sharded document cluster behind failover routers. Shards are
/// in-process document-backend instances; the routing table is swapped
/// atomically under the cluster lock, so requests either see the old or the
/// new table, never a mix.
class ShardCluster {
public:
    explicit ShardCluster(ClusterSpec spec);

    // Client operations (routed with failover across live routers).
    SimResult<EntityId> insert(json record);
    QueryResult query(const json& predicate);
    SimResult<json> read(std::int64_t key, const EntityId& id);

    // Router administration.
    void fail_router(int router_id);
    void revive_router(int router_id);
    int live_router_count() const;

    /// Splits the range owning split_point; records above it migrate to the
    /// new shard (stop-the-world). Fails when the point is already a split.
    SimStatus add_shard(std::int64_t split_point);

    // Introspection.
    int shard_count() const;
    int router_count() const;
    int shard_owning(std::int64_t key) const;
    std::vector<KeyRange> ranges() const;
    std::size_t total_records() const;
    std::size_t shard_record_count(int shard) const;
    bool replicas_consistent() const;
    /// shardsContacted histogram: value -> number of queries that contacted
    /// that many shards.
    std::map<int, std::uint64_t> contacted_histogram() const;

    const ClusterSpec& spec() const { return spec_; }

private:
    struct Shard {
        KeyRange range;
        std::unique_ptr<store::DocumentStore> primary;
        std::vector<std::unique_ptr<store::DocumentStore>> replicas;
    };

    struct Router {
        int id = 0;
        bool alive = true;
    };

    std::optional<std::int64_t> extract_key(const json& record) const;
    int owner_index_locked(std::int64_t key) const;
    SimStatus pick_router_locked(int& hops);
    void simulate_hops(int hops) const;

    ClusterSpec spec_;
    mutable std::mutex mu_;
    std::vector<Shard> shards_;
    std::vector<Router> routers_;
    std::map<int, std::uint64_t> contacted_histogram_;
};

}  // namespace vre::shardsim
