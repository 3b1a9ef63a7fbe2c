#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vre::crypto {

using Digest = std::array<std::uint8_t, 32>;

/// Incremental SHA-256. One-shot helpers below cover most call sites.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    Digest finish();
    void reset();

private:
    void compress(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::uint64_t total_ = 0;
    std::size_t buffered_ = 0;
};

Digest sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

std::vector<std::uint8_t> hmac_sha256(std::string_view key, std::string_view message);

/// PBKDF2 with HMAC-SHA256 as the pseudorandom function. The salt is used
/// byte-for-byte as given (a base64 salt string is hashed as text, matching
/// how string salts are fed into the derivation in practice).
std::vector<std::uint8_t> pbkdf2_hmac_sha256(std::string_view password, std::string_view salt,
                                             int iterations, std::size_t dklen);

std::string base64_encode(std::span<const std::uint8_t> data);
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> data);

/// Timing-safe byte comparison; false when lengths differ.
bool constant_time_equal(std::string_view a, std::string_view b);

std::vector<std::uint8_t> random_bytes(std::size_t n);
/// Random [0-9a-z A-Z] token of the requested length.
std::string random_token(std::size_t chars);
/// Random lowercase hex string of the requested length.
std::string random_hex(std::size_t chars);

}  // namespace vre::crypto
