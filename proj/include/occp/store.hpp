#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mona/hash.hpp"

namespace occp {

using mona::Hash32;

struct BlobRef {
    Hash32 hash;
    uint64_t size_bytes = 0;

    bool operator==(const BlobRef& o) const { return hash == o.hash; }
};

class NotFound : public std::runtime_error {
public:
    explicit NotFound(const Hash32& h) : std::runtime_error("blob not found: " + h.hex()) {}
};

class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const Hash32& h)
        : std::runtime_error("blob content does not hash to " + h.hex()) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Content-addressed blob store. put() is idempotent; get() verifies the
// content hash on every read.
class BlobStore {
public:
    virtual ~BlobStore() = default;
    virtual BlobRef put(const std::vector<uint8_t>& bytes) = 0;
    virtual std::vector<uint8_t> get(const BlobRef& ref) const = 0;
    virtual bool contains(const Hash32& hash) const = 0;

    BlobRef put(std::string_view text) {
        return put(std::vector<uint8_t>(text.begin(), text.end()));
    }
    std::vector<uint8_t> get(const Hash32& hash) const { return get(BlobRef{hash, 0}); }
};

// Filesystem layout: store/<first2hex>/<hex>.blob, written to a temp file and
// atomically renamed.
class DirBlobStore : public BlobStore {
public:
    using BlobStore::put;
    using BlobStore::get;
    explicit DirBlobStore(std::filesystem::path root);

    BlobRef put(const std::vector<uint8_t>& bytes) override;
    std::vector<uint8_t> get(const BlobRef& ref) const override;
    bool contains(const Hash32& hash) const override;

    std::filesystem::path path_for(const Hash32& hash) const;

private:
    std::filesystem::path root_;
};

class MemBlobStore : public BlobStore {
public:
    using BlobStore::put;
    using BlobStore::get;
    BlobRef put(const std::vector<uint8_t>& bytes) override;
    std::vector<uint8_t> get(const BlobRef& ref) const override;
    bool contains(const Hash32& hash) const override;

private:
    std::map<Hash32, std::vector<uint8_t>> blobs_;
};

}  // namespace occp
