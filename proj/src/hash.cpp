#include "mona/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace mona {

namespace {

char hex_digit(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

unsigned hex_value(char c) {
    if (c >= '0' && c <= '9') return unsigned(c - '0');
    if (c >= 'a' && c <= 'f') return unsigned(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return unsigned(c - 'A' + 10);
    throw std::invalid_argument("invalid hex digit");
}

}  // namespace

std::string Hash32::hex() const {
    std::string s;
    s.reserve(64);
    for (uint8_t b : bytes) {
        s.push_back(hex_digit(b >> 4));
        s.push_back(hex_digit(b & 0xf));
    }
    return s;
}

Hash32 Hash32::from_hex(std::string_view hex) {
    if (hex.size() != 64) throw std::invalid_argument("hash hex must be 64 chars");
    Hash32 h;
    for (size_t i = 0; i < 32; ++i) {
        h.bytes[i] = uint8_t((hex_value(hex[2 * i]) << 4) | hex_value(hex[2 * i + 1]));
    }
    return h;
}

Sha256::Sha256() {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 init failed");
    }
    ctx_ = ctx;
}

Sha256::~Sha256() {
    if (ctx_) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Sha256::update(const void* data, size_t len) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, len) != 1) {
        throw std::runtime_error("sha256 update failed");
    }
}

void Sha256::update(std::string_view data) { update(data.data(), data.size()); }

Hash32 Sha256::finish() {
    Hash32 h;
    unsigned int out_len = 0;
    if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), h.bytes.data(), &out_len) != 1 ||
        out_len != 32) {
        throw std::runtime_error("sha256 final failed");
    }
    return h;
}

Hash32 sha256(const void* data, size_t len) {
    Sha256 s;
    s.update(data, len);
    return s.finish();
}

Hash32 sha256(std::string_view data) { return sha256(data.data(), data.size()); }

Hash32 sha256(const std::vector<uint8_t>& data) { return sha256(data.data(), data.size()); }

}  // namespace mona
