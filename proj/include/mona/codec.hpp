#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mona/hash.hpp"
#include "mona/state.hpp"

namespace mona {

class CorruptSnapshot : public std::runtime_error {
public:
    explicit CorruptSnapshot(const std::string& msg)
        : std::runtime_error("corrupt snapshot: " + msg) {}
};

// Canonical byte encoding of a memory state: key-sorted maps, length-prefixed
// lists, sign+magnitude integers, big-endian IEEE-754 floats. Injective up to
// canonical equality; decode inverts encode.
std::vector<uint8_t> canonical_encode(const MemoryState& state);
MemoryState canonical_decode(const std::vector<uint8_t>& bytes);

inline Hash32 state_hash(const MemoryState& state) { return sha256(canonical_encode(state)); }

inline bool canonical_equal(const MemoryState& a, const MemoryState& b) {
    return canonical_encode(a) == canonical_encode(b);
}

}  // namespace mona
