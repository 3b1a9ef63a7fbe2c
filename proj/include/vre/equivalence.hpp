#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vre/store.hpp"

namespace vre::store {

/// One contract operation in a replayable sequence. String values of the
/// form "@<n>" refer to the id returned by the n-th Create in the sequence
/// and are substituted per backend at replay time.
struct OracleOp {
    enum class Kind { Create, Read, Update, Delete, List, Query };

    Kind kind = Kind::Create;
    std::string collection;
    json payload;     // Create document / Update patch / Query predicate
    int target = -1;  // Create ordinal the op addresses (Read/Update/Delete)
};

struct Divergence {
    std::size_t op_index = 0;
    std::string description;
    /// True for the documented referential-integrity asymmetry: the
    /// normalized engine rejects what the document engine accepts.
    bool expected_by_design = false;
};

struct Verdict {
    std::vector<Divergence> divergences;

    bool clean() const { return divergences.empty(); }
    bool clean_or_expected() const {
        for (const auto& d : divergences) {
            if (!d.expected_by_design) return false;
        }
        return true;
    }
};

/// Replays the sequence on both stores and compares every observable result
/// (status codes and documents, with backend ids normalized back to "@<n>"
/// by creation order).
Verdict replay_on_both(const std::vector<OracleOp>& ops, Store& normalized, Store& document);

/// Seeded generator of referentially valid CRUD sequences: creates satisfy
/// every foreign key, deletes only target unreferenced records, link pairs
/// stay unique. Both backends must accept every op.
std::vector<OracleOp> generate_valid_ops(std::size_t count, std::uint64_t seed);

}  // namespace vre::store
