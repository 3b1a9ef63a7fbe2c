#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "vre/entities.hpp"
#include "vre/store.hpp"

namespace vre::auth {

enum class HashScheme { Pbkdf2Sha256, LegacySha256Concat };

/// Stored credential material. For Pbkdf2Sha256 the hash is the base64 of a
/// 64-byte PBKDF2-HMAC-SHA256 key (10,000 iterations, the salt string fed in
/// as-is). The legacy scheme's stored form is the plain salt prepended to the
/// raw 32-byte SHA-256 of (salt + password).
struct PasswordRecord {
    std::string salt;  // base64 of >=16 random bytes
    std::string hash;  // base64
    HashScheme scheme = HashScheme::Pbkdf2Sha256;
};

inline constexpr int kPbkdf2Iterations = 10000;
inline constexpr std::size_t kPbkdf2KeyLen = 64;

/// Derives the base64 key for (password, salt) under the pbkdf2 scheme.
std::string hash_password(std::string_view password, std::string_view salt);

/// Fresh salt + derived hash for a new account.
PasswordRecord make_password_record(std::string_view password);

bool verify_password(const PasswordRecord& record, std::string_view password);

enum class LegacyError { Malformed };

/// Checks a password against the legacy combined field
/// (salt + SHA256(salt + password), hash suffix raw 32 bytes).
/// Returns nullopt when the stored field is too short to parse.
std::optional<bool> verify_legacy(std::string_view password, std::string_view stored_field);

struct Session {
    std::string token;
    EntityId account_id;
    model::Role role = model::Role::Patient;
    std::int64_t issued_at_ms = 0;
};

/// Concurrent token -> session map. Tokens carry 128+ bits of entropy and
/// never repeat within a run. No expiry (not modelled).
class SessionTable {
public:
    Session issue(const EntityId& account_id, model::Role role);
    std::optional<Session> find(std::string_view token) const;
    bool revoke(std::string_view token);
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, Session> sessions_;
};

/// Login against the Accounts collection. Unknown user and wrong password are
/// indistinguishable to the caller (uniform failure).
class AuthService {
public:
    AuthService(store::Store& store, SessionTable& sessions) : store_(store), sessions_(sessions) {}

    std::optional<Session> login(std::string_view username, std::string_view password);

private:
    store::Store& store_;
    SessionTable& sessions_;
};

/// Builds the stored account fields for a new pbkdf2 account.
json account_credential_fields(std::string_view password);

}  // namespace vre::auth
