#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mona {

// 32-byte SHA-256 digest, rendered as lowercase hex.
struct Hash32 {
    std::array<uint8_t, 32> bytes{};

    bool operator==(const Hash32& other) const { return bytes == other.bytes; }
    bool operator!=(const Hash32& other) const { return bytes != other.bytes; }
    bool operator<(const Hash32& other) const { return bytes < other.bytes; }

    std::string hex() const;
    static Hash32 from_hex(std::string_view hex);
};

Hash32 sha256(const void* data, size_t len);
Hash32 sha256(std::string_view data);
Hash32 sha256(const std::vector<uint8_t>& data);

// Incremental hashing for chained digests.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, size_t len);
    void update(std::string_view data);
    void update(const Hash32& h) { update(h.bytes.data(), h.bytes.size()); }
    Hash32 finish();

private:
    void* ctx_;
};

}  // namespace mona

template <>
struct std::hash<mona::Hash32> {
    size_t operator()(const mona::Hash32& h) const noexcept {
        size_t v;
        static_assert(sizeof(v) <= 32);
        __builtin_memcpy(&v, h.bytes.data(), sizeof(v));
        return v;
    }
};
