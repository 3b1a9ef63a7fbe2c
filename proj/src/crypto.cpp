#include "vre/crypto.hpp"

#include <cstring>
#include <mutex>
#include <random>

namespace vre::crypto {

namespace {

constexpr std::array<std::uint32_t, 64> kRoundConstants = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

constexpr std::array<std::uint32_t, 8> kInitState = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                                     0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

std::mt19937_64& locked_rng(std::unique_lock<std::mutex>& lock) {
    static std::mutex mu;
    static std::mt19937_64 rng = [] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }();
    lock = std::unique_lock<std::mutex>(mu);
    return rng;
}

}  // namespace

Sha256::Sha256() { reset(); }

void Sha256::reset() {
    state_ = kInitState;
    total_ = 0;
    buffered_ = 0;
}

void Sha256::compress(const std::uint8_t* block) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
        w[i] = (std::uint32_t(block[i * 4]) << 24) | (std::uint32_t(block[i * 4 + 1]) << 16) |
               (std::uint32_t(block[i * 4 + 2]) << 8) | std::uint32_t(block[i * 4 + 3]);
    }
    for (int i = 16; i < 64; ++i) {
        std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
        std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    auto [a, b, c, d, e, f, g, h] = state_;
    for (int i = 0; i < 64; ++i) {
        std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
        std::uint32_t ch = (e & f) ^ (~e & g);
        std::uint32_t temp1 = h + s1 + ch + kRoundConstants[i] + w[i];
        std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
        std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        std::uint32_t temp2 = s0 + maj;
        h = g;
        g = f;
        f = e;
        e = d + temp1;
        d = c;
        c = b;
        b = a;
        a = temp1 + temp2;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
    state_[5] += f;
    state_[6] += g;
    state_[7] += h;
}

void Sha256::update(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    total_ += len;
    if (buffered_ > 0) {
        std::size_t take = std::min(len, buffer_.size() - buffered_);
        std::memcpy(buffer_.data() + buffered_, p, take);
        buffered_ += take;
        p += take;
        len -= take;
        if (buffered_ == buffer_.size()) {
            compress(buffer_.data());
            buffered_ = 0;
        }
    }
    while (len >= 64) {
        compress(p);
        p += 64;
        len -= 64;
    }
    if (len > 0) {
        std::memcpy(buffer_.data(), p, len);
        buffered_ = len;
    }
}

Digest Sha256::finish() {
    std::uint64_t bit_len = total_ * 8;
    std::uint8_t pad[72] = {0x80};
    std::size_t pad_len = (buffered_ < 56) ? (56 - buffered_) : (120 - buffered_);
    update(pad, pad_len);
    std::uint8_t len_be[8];
    for (int i = 0; i < 8; ++i) len_be[i] = static_cast<std::uint8_t>(bit_len >> (56 - 8 * i));
    update(len_be, 8);
    Digest out;
    for (int i = 0; i < 8; ++i) {
        out[i * 4] = static_cast<std::uint8_t>(state_[i] >> 24);
        out[i * 4 + 1] = static_cast<std::uint8_t>(state_[i] >> 16);
        out[i * 4 + 2] = static_cast<std::uint8_t>(state_[i] >> 8);
        out[i * 4 + 3] = static_cast<std::uint8_t>(state_[i]);
    }
    reset();
    return out;
}

Digest sha256(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.finish();
}

std::string sha256_hex(std::string_view data) {
    Digest d = sha256(data);
    return to_hex(d);
}

namespace {

/// HMAC with precomputed pads so PBKDF2 can reuse the key schedule.
class HmacSha256 {
public:
    explicit HmacSha256(std::string_view key) {
        std::array<std::uint8_t, 64> k{};
        if (key.size() > 64) {
            Digest d = sha256(key);
            std::memcpy(k.data(), d.data(), d.size());
        } else {
            std::memcpy(k.data(), key.data(), key.size());
        }
        for (int i = 0; i < 64; ++i) {
            ipad_[i] = k[i] ^ 0x36;
            opad_[i] = k[i] ^ 0x5c;
        }
    }

    Digest digest(const void* msg, std::size_t len) const {
        Sha256 inner;
        inner.update(ipad_.data(), ipad_.size());
        inner.update(msg, len);
        Digest id = inner.finish();
        Sha256 outer;
        outer.update(opad_.data(), opad_.size());
        outer.update(id.data(), id.size());
        return outer.finish();
    }

private:
    std::array<std::uint8_t, 64> ipad_{};
    std::array<std::uint8_t, 64> opad_{};
};

}  // namespace

std::vector<std::uint8_t> hmac_sha256(std::string_view key, std::string_view message) {
    HmacSha256 mac(key);
    Digest d = mac.digest(message.data(), message.size());
    return {d.begin(), d.end()};
}

std::vector<std::uint8_t> pbkdf2_hmac_sha256(std::string_view password, std::string_view salt,
                                             int iterations, std::size_t dklen) {
    HmacSha256 prf(password);
    std::vector<std::uint8_t> out;
    out.reserve(dklen);
    std::uint32_t block_index = 1;
    while (out.size() < dklen) {
        std::vector<std::uint8_t> first(salt.begin(), salt.end());
        first.push_back(static_cast<std::uint8_t>(block_index >> 24));
        first.push_back(static_cast<std::uint8_t>(block_index >> 16));
        first.push_back(static_cast<std::uint8_t>(block_index >> 8));
        first.push_back(static_cast<std::uint8_t>(block_index));
        Digest u = prf.digest(first.data(), first.size());
        Digest acc = u;
        for (int i = 1; i < iterations; ++i) {
            u = prf.digest(u.data(), u.size());
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] ^= u[j];
        }
        std::size_t take = std::min(acc.size(), dklen - out.size());
        out.insert(out.end(), acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(take));
        ++block_index;
    }
    return out;
}

namespace {
constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= data.size()) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64Chars[(v >> 18) & 63]);
        out.push_back(kB64Chars[(v >> 12) & 63]);
        out.push_back(kB64Chars[(v >> 6) & 63]);
        out.push_back(kB64Chars[v & 63]);
        i += 3;
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t v = data[i] << 16;
        out.push_back(kB64Chars[(v >> 18) & 63]);
        out.push_back(kB64Chars[(v >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64Chars[(v >> 18) & 63]);
        out.push_back(kB64Chars[(v >> 12) & 63]);
        out.push_back(kB64Chars[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) return std::nullopt;
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t v = 0;
        for (int j = 0; j < 4; ++j) {
            char c = text[i + j];
            if (c == '=') {
                if (i + 4 != text.size() || j < 2) return std::nullopt;
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad > 0) return std::nullopt;
            int d = value_of(c);
            if (d < 0) return std::nullopt;
            v = (v << 6) | static_cast<std::uint32_t>(d);
        }
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 15]);
    }
    return out;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff |= static_cast<unsigned char>(a[i]) ^ static_cast<unsigned char>(b[i]);
    }
    return diff == 0;
}

std::vector<std::uint8_t> random_bytes(std::size_t n) {
    std::unique_lock<std::mutex> lock;
    auto& rng = locked_rng(lock);
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 0xff);
    return out;
}

std::string random_token(std::size_t chars) {
    static constexpr char kAlnum[] = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
    std::unique_lock<std::mutex> lock;
    auto& rng = locked_rng(lock);
    std::uniform_int_distribution<int> dist(0, 61);
    std::string out(chars, '0');
    for (auto& c : out) c = kAlnum[dist(rng)];
    return out;
}

std::string random_hex(std::size_t chars) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::unique_lock<std::mutex> lock;
    auto& rng = locked_rng(lock);
    std::uniform_int_distribution<int> dist(0, 15);
    std::string out(chars, '0');
    for (auto& c : out) c = kHex[dist(rng)];
    return out;
}

}  // namespace vre::crypto
