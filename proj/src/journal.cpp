#include "vre/journal.hpp"

#include <cstdint>

namespace vre::store {

json to_json(const JournalRecord& r) {
    json j{{"c", r.collection}, {"o", r.op}, {"i", r.id}};
    if (r.op == "put") j["d"] = r.doc;
    return j;
}

JournalRecord journal_record_from_json(const json& j) {
    JournalRecord r;
    r.collection = j.value("c", std::string{});
    r.op = j.value("o", std::string{});
    r.id = j.value("i", std::string{});
    if (j.contains("d")) r.doc = j["d"];
    return r;
}

bool JournalWriter::open(const std::filesystem::path& path) {
    if (!path.parent_path().empty()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::app);
    return out_.is_open();
}

void JournalWriter::append(const JournalRecord& record) {
    if (!out_.is_open()) return;
    const std::string payload = to_json(record).dump();
    const auto len = static_cast<std::uint32_t>(payload.size());
    char header[4] = {static_cast<char>(len & 0xff), static_cast<char>((len >> 8) & 0xff),
                      static_cast<char>((len >> 16) & 0xff), static_cast<char>((len >> 24) & 0xff)};
    out_.write(header, 4);
    out_.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

void JournalWriter::flush() {
    if (out_.is_open()) out_.flush();
}

void JournalWriter::close() {
    if (out_.is_open()) out_.close();
}

std::vector<JournalRecord> replay_journal(const std::filesystem::path& path) {
    std::vector<JournalRecord> records;
    std::ifstream in(path, std::ios::binary);
    if (!in) return records;
    while (true) {
        unsigned char header[4];
        in.read(reinterpret_cast<char*>(header), 4);
        if (in.gcount() != 4) break;
        std::uint32_t len = std::uint32_t(header[0]) | (std::uint32_t(header[1]) << 8) |
                            (std::uint32_t(header[2]) << 16) | (std::uint32_t(header[3]) << 24);
        std::string payload(len, '\0');
        in.read(payload.data(), static_cast<std::streamsize>(len));
        if (in.gcount() != static_cast<std::streamsize>(len)) break;
        json j = json::parse(payload, nullptr, false);
        if (j.is_discarded()) break;
        records.push_back(journal_record_from_json(j));
    }
    return records;
}

}  // namespace vre::store
