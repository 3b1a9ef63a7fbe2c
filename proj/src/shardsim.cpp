#include "vre/shardsim.hpp"

#include <algorithm>
#include <thread>

namespace vre::shardsim {

std::optional<ClusterSpec> cluster_spec_from_json(const json& j) {
    if (!j.is_object()) return std::nullopt;
    ClusterSpec spec;
    spec.key.field = j.value("fieldName", std::string{"patient_id"});
    if (j.contains("splitPoints")) {
        if (!j["splitPoints"].is_array()) return std::nullopt;
        for (const auto& p : j["splitPoints"]) {
            if (!p.is_number_integer()) return std::nullopt;
            spec.key.split_points.push_back(p.get<std::int64_t>());
        }
    }
    std::sort(spec.key.split_points.begin(), spec.key.split_points.end());
    spec.router_count = j.value("routerCount", 2);
    spec.replica_count = j.value("replicaCount", 0);
    spec.collection = j.value("collection", std::string{"records"});
    spec.per_hop_latency_us = j.value("perHopLatencyUs", 0);
    if (spec.router_count < 1) return std::nullopt;
    return spec;
}

json cluster_spec_to_json(const ClusterSpec& spec) {
    return json{{"fieldName", spec.key.field},
                {"splitPoints", spec.key.split_points},
                {"shardCount", spec.key.split_points.size() + 1},
                {"routerCount", spec.router_count},
                {"replicaCount", spec.replica_count},
                {"collection", spec.collection},
                {"perHopLatencyUs", spec.per_hop_latency_us}};
}

ShardCluster::ShardCluster(ClusterSpec spec) : spec_(std::move(spec)) {
    std::vector<std::int64_t> splits = spec_.key.split_points;
    std::sort(splits.begin(), splits.end());
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t split : splits) {
        Shard shard;
        shard.range = {lo, split};
        shard.primary = std::make_unique<store::DocumentStore>("");
        for (int r = 0; r < spec_.replica_count; ++r) {
            shard.replicas.push_back(std::make_unique<store::DocumentStore>(""));
        }
        shards_.push_back(std::move(shard));
        lo = split;
    }
    Shard last;
    last.range = {lo, std::numeric_limits<std::int64_t>::max()};
    last.primary = std::make_unique<store::DocumentStore>("");
    for (int r = 0; r < spec_.replica_count; ++r) {
        last.replicas.push_back(std::make_unique<store::DocumentStore>(""));
    }
    shards_.push_back(std::move(last));

    for (int r = 0; r < spec_.router_count; ++r) routers_.push_back({r, true});
}

std::optional<std::int64_t> ShardCluster::extract_key(const json& record) const {
    auto it = record.find(spec_.key.field);
    if (it == record.end()) return std::nullopt;
    if (it->is_number_integer()) return it->get<std::int64_t>();
    if (it->is_string()) {
        try {
            std::size_t used = 0;
            const std::string text = it->get<std::string>();
            std::int64_t value = std::stoll(text, &used);
            if (used == text.size()) return value;
        } catch (...) {
        }
    }
    return std::nullopt;
}

int ShardCluster::owner_index_locked(std::int64_t key) const {
    for (std::size_t i = 0; i < shards_.size(); ++i) {
        if (shards_[i].range.contains(key)) return static_cast<int>(i);
    }
    return -1;  // ranges partition the key space; unreachable
}

SimStatus ShardCluster::pick_router_locked(int& hops) {
    for (const auto& router : routers_) {
        if (router.alive) {
            hops = 1;  // client -> router
            return {};
        }
    }
    return {SimErr::NoLiveRouter, "all routers down"};
}

void ShardCluster::simulate_hops(int hops) const {
    if (spec_.per_hop_latency_us > 0 && hops > 0) {
        std::this_thread::sleep_for(std::chrono::microseconds(spec_.per_hop_latency_us * hops));
    }
}

SimResult<EntityId> ShardCluster::insert(json record) {
    std::unique_lock<std::mutex> lock(mu_);
    int hops = 0;
    if (SimStatus s = pick_router_locked(hops); !s.ok()) return {s};
    auto key = extract_key(record);
    if (!key) {
        return {{SimErr::MissingShardKey, "record lacks shard key field " + spec_.key.field}};
    }
    const int owner = owner_index_locked(*key);
    auto& shard = shards_[static_cast<std::size_t>(owner)];
    auto created = shard.primary->create(spec_.collection, record);
    if (!created.ok()) {
        return {{SimErr::Internal, std::string(store::to_string(created.status.code))}};
    }
    record["_id"] = created.value;
    for (auto& replica : shard.replicas) replica->create(spec_.collection, record);
    lock.unlock();
    simulate_hops(hops + 1);  // router -> owner shard
    return {{}, created.value};
}

QueryResult ShardCluster::query(const json& predicate) {
    std::unique_lock<std::mutex> lock(mu_);
    QueryResult result;
    int hops = 0;
    if (SimStatus s = pick_router_locked(hops); !s.ok()) {
        result.status = s;
        return result;
    }
    std::optional<std::int64_t> key;
    if (predicate.is_object()) key = extract_key(predicate);
    if (key) {
        // Targeted: the router knows the owner.
        const int owner = owner_index_locked(*key);
        result.docs = shards_[static_cast<std::size_t>(owner)].primary->query(spec_.collection,
                                                                              predicate);
        result.shards_contacted = 1;
    } else {
        // Scatter-gather over every shard, merged in shard order.
        for (auto& shard : shards_) {
            auto rows = shard.primary->query(spec_.collection, predicate);
            result.docs.insert(result.docs.end(), rows.begin(), rows.end());
        }
        result.shards_contacted = static_cast<int>(shards_.size());
    }
    ++contacted_histogram_[result.shards_contacted];
    const int total_hops = hops + result.shards_contacted;
    lock.unlock();
    simulate_hops(total_hops);
    return result;
}

SimResult<json> ShardCluster::read(std::int64_t key, const EntityId& id) {
    std::unique_lock<std::mutex> lock(mu_);
    int hops = 0;
    if (SimStatus s = pick_router_locked(hops); !s.ok()) return {s};
    const int owner = owner_index_locked(key);
    auto r = shards_[static_cast<std::size_t>(owner)].primary->read(spec_.collection, id);
    lock.unlock();
    simulate_hops(hops + 1);
    if (!r.ok()) return {{SimErr::NotFound, "no such record"}};
    return {{}, r.value};
}

void ShardCluster::fail_router(int router_id) {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& router : routers_) {
        if (router.id == router_id) router.alive = false;
    }
}

void ShardCluster::revive_router(int router_id) {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& router : routers_) {
        if (router.id == router_id) router.alive = true;
    }
}

int ShardCluster::live_router_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    int live = 0;
    for (const auto& router : routers_) {
        if (router.alive) ++live;
    }
    return live;
}

SimStatus ShardCluster::add_shard(std::int64_t split_point) {
    // Stop-the-world: the cluster lock queues writers while records migrate
    // and the routing table swap is atomic with respect to dispatch.
    std::lock_guard<std::mutex> lock(mu_);
    int owner = -1;
    for (std::size_t i = 0; i < shards_.size(); ++i) {
        if (shards_[i].range.lo == split_point) {
            return {SimErr::InvalidSplitPoint, "split point already a boundary"};
        }
        if (shards_[i].range.contains(split_point)) owner = static_cast<int>(i);
    }
    if (owner < 0) return {SimErr::InvalidSplitPoint, "split point outside key space"};

    auto& old_shard = shards_[static_cast<std::size_t>(owner)];
    Shard fresh;
    fresh.range = {split_point, old_shard.range.hi};
    fresh.primary = std::make_unique<store::DocumentStore>("");
    for (int r = 0; r < spec_.replica_count; ++r) {
        fresh.replicas.push_back(std::make_unique<store::DocumentStore>(""));
    }
    old_shard.range.hi = split_point;

    // Migrate records at or above the split.
    std::vector<json> moving;
    for (const auto& doc : old_shard.primary->list(spec_.collection)) {
        auto key = extract_key(doc);
        if (key && *key >= split_point) moving.push_back(doc);
    }
    for (const auto& doc : moving) {
        const EntityId id = doc.value("_id", std::string{});
        fresh.primary->create(spec_.collection, doc);
        for (auto& replica : fresh.replicas) replica->create(spec_.collection, doc);
        old_shard.primary->remove(spec_.collection, id);
        for (auto& replica : old_shard.replicas) replica->remove(spec_.collection, id);
    }

    shards_.insert(shards_.begin() + owner + 1, std::move(fresh));
    spec_.key.split_points.push_back(split_point);
    std::sort(spec_.key.split_points.begin(), spec_.key.split_points.end());
    return {};
}

int ShardCluster::shard_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return static_cast<int>(shards_.size());
}

int ShardCluster::router_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return static_cast<int>(routers_.size());
}

int ShardCluster::shard_owning(std::int64_t key) const {
    std::lock_guard<std::mutex> lock(mu_);
    return owner_index_locked(key);
}

std::vector<KeyRange> ShardCluster::ranges() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<KeyRange> out;
    for (const auto& shard : shards_) out.push_back(shard.range);
    return out;
}

std::size_t ShardCluster::total_records() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t total = 0;
    for (const auto& shard : shards_) total += shard.primary->list(spec_.collection).size();
    return total;
}

std::size_t ShardCluster::shard_record_count(int shard) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (shard < 0 || shard >= static_cast<int>(shards_.size())) return 0;
    return shards_[static_cast<std::size_t>(shard)].primary->list(spec_.collection).size();
}

bool ShardCluster::replicas_consistent() const {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& shard : shards_) {
        const auto primary_rows = shard.primary->list(spec_.collection);
        for (const auto& replica : shard.replicas) {
            if (replica->list(spec_.collection) != primary_rows) return false;
        }
    }
    return true;
}

std::map<int, std::uint64_t> ShardCluster::contacted_histogram() const {
    std::lock_guard<std::mutex> lock(mu_);
    return contacted_histogram_;
}

}  // namespace vre::shardsim
