#include "occp/store.hpp"

#include <fstream>

namespace occp {

namespace fs = std::filesystem;

DirBlobStore::DirBlobStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("cannot create store root " + root_.string() + ": " + ec.message());
}

fs::path DirBlobStore::path_for(const Hash32& hash) const {
    std::string hex = hash.hex();
    return root_ / hex.substr(0, 2) / (hex + ".blob");
}

BlobRef DirBlobStore::put(const std::vector<uint8_t>& bytes) {
    Hash32 h = mona::sha256(bytes);
    BlobRef ref{h, bytes.size()};
    fs::path target = path_for(h);
    std::error_code ec;
    if (fs::exists(target, ec)) return ref;  // idempotent
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create " + target.parent_path().string());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string());
        f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        if (!f) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename failed: " + target.string() + ": " + ec.message());
    return ref;
}

std::vector<uint8_t> DirBlobStore::get(const BlobRef& ref) const {
    fs::path target = path_for(ref.hash);
    std::ifstream f(target, std::ios::binary);
    if (!f) throw NotFound(ref.hash);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (mona::sha256(bytes) != ref.hash) throw IntegrityError(ref.hash);
    return bytes;
}

bool DirBlobStore::contains(const Hash32& hash) const {
    std::error_code ec;
    return fs::exists(path_for(hash), ec);
}

BlobRef MemBlobStore::put(const std::vector<uint8_t>& bytes) {
    Hash32 h = mona::sha256(bytes);
    blobs_.emplace(h, bytes);
    return BlobRef{h, bytes.size()};
}

std::vector<uint8_t> MemBlobStore::get(const BlobRef& ref) const {
    auto it = blobs_.find(ref.hash);
    if (it == blobs_.end()) throw NotFound(ref.hash);
    if (mona::sha256(it->second) != ref.hash) throw IntegrityError(ref.hash);
    return it->second;
}

bool MemBlobStore::contains(const Hash32& hash) const { return blobs_.count(hash) != 0; }

}  // namespace occp
