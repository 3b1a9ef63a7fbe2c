#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vre/json.hpp"

namespace vre::store {

/// One replayable write. "put" carries the full post-image of the document,
/// "del" only the id; replaying the log in order rebuilds the store.
struct JournalRecord {
    std::string collection;
    std::string op;  // "put" | "del"
    std::string id;
    json doc;  // empty for "del"
};

json to_json(const JournalRecord& r);
JournalRecord journal_record_from_json(const json& j);

/// Append-only writer over a single file. Records are length-prefixed
/// (u32 little-endian) JSON payloads so a torn tail is detectable.
class JournalWriter {
public:
    JournalWriter() = default;

    bool open(const std::filesystem::path& path);
    bool is_open() const { return out_.is_open(); }
    void append(const JournalRecord& record);
    void flush();
    void close();

private:
    std::ofstream out_;
};

/// Replays every complete record; a truncated final record (torn write) is
/// silently dropped.
std::vector<JournalRecord> replay_journal(const std::filesystem::path& path);

}  // namespace vre::store
