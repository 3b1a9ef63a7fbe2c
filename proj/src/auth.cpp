#include "vre/auth.hpp"

#include "vre/crypto.hpp"
#include "vre/util.hpp"

namespace vre::auth {

std::string hash_password(std::string_view password, std::string_view salt) {
    auto key = crypto::pbkdf2_hmac_sha256(password, salt, kPbkdf2Iterations, kPbkdf2KeyLen);
    return crypto::base64_encode(key);
}

PasswordRecord make_password_record(std::string_view password) {
    PasswordRecord record;
    record.salt = crypto::base64_encode(crypto::random_bytes(16));
    record.hash = hash_password(password, record.salt);
    record.scheme = HashScheme::Pbkdf2Sha256;
    return record;
}

bool verify_password(const PasswordRecord& record, std::string_view password) {
    if (record.scheme == HashScheme::LegacySha256Concat) {
        auto combined = crypto::base64_decode(record.hash);
        if (!combined) return false;
        std::string_view field(reinterpret_cast<const char*>(combined->data()), combined->size());
        return verify_legacy(password, field).value_or(false);
    }
    return crypto::constant_time_equal(record.hash, hash_password(password, record.salt));
}

std::optional<bool> verify_legacy(std::string_view password, std::string_view stored_field) {
    // Salt prefix plus raw 32-byte digest suffix; an empty salt is malformed.
    if (stored_field.size() <= 32) return std::nullopt;
    std::string_view salt = stored_field.substr(0, stored_field.size() - 32);
    std::string_view expected = stored_field.substr(stored_field.size() - 32);
    crypto::Digest digest = crypto::sha256(std::string(salt) + std::string(password));
    std::string_view actual(reinterpret_cast<const char*>(digest.data()), digest.size());
    return crypto::constant_time_equal(actual, expected);
}

Session SessionTable::issue(const EntityId& account_id, model::Role role) {
    Session session;
    session.token = crypto::to_hex(crypto::random_bytes(24));  // 192 bits
    session.account_id = account_id;
    session.role = role;
    session.issued_at_ms = util::unix_millis();
    std::lock_guard<std::mutex> lock(mu_);
    sessions_[session.token] = session;
    return session;
}

std::optional<Session> SessionTable::find(std::string_view token) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = sessions_.find(std::string(token));
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

bool SessionTable::revoke(std::string_view token) {
    std::lock_guard<std::mutex> lock(mu_);
    return sessions_.erase(std::string(token)) > 0;
}

std::size_t SessionTable::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return sessions_.size();
}

std::optional<Session> AuthService::login(std::string_view username, std::string_view password) {
    auto matches = store_.query("Accounts", json{{"username", std::string(username)}});
    if (matches.empty()) return std::nullopt;
    const json& account = matches.front();

    PasswordRecord record;
    record.salt = account.value("salt", std::string{});
    record.hash = account.value("password_hash", std::string{});
    record.scheme = account.value("scheme", std::string{}) == "legacy_sha256_concat"
                        ? HashScheme::LegacySha256Concat
                        : HashScheme::Pbkdf2Sha256;
    if (!verify_password(record, password)) return std::nullopt;

    auto role = model::role_from_string(account.value("role", std::string{}));
    if (!role) return std::nullopt;
    return sessions_.issue(account.value("_id", std::string{}), *role);
}

json account_credential_fields(std::string_view password) {
    PasswordRecord record = make_password_record(password);
    return json{{"salt", record.salt}, {"password_hash", record.hash}};
}

}  // namespace vre::auth
