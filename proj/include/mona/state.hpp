#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mona/value.hpp"

namespace mona {

// Memvar cache key within one scope: the SeqID of the consuming evaluable
// node plus an operand slot distinguishing multiple reads by the same node.
struct MemvarKey {
    int32_t anchor_seq;
    uint32_t slot;

    bool operator<(const MemvarKey& o) const {
        return anchor_seq != o.anchor_seq ? anchor_seq < o.anchor_seq : slot < o.slot;
    }
    bool operator==(const MemvarKey& o) const {
        return anchor_seq == o.anchor_seq && slot == o.slot;
    }
};

// One open scope's slice of M: program variables plus memvar cache entries.
// Both kept sorted for deterministic canonical encoding.
struct Frame {
    std::vector<std::pair<std::string, Value>> vars;
    std::vector<std::pair<MemvarKey, Value>> memvars;

    Value* find_var(const std::string& name);
    const Value* find_var(const std::string& name) const;
    bool declare_var(const std::string& name, Value v);  // false if already present

    const Value* find_memvar(MemvarKey key) const;
    void put_memvar(MemvarKey key, Value v);
};

// The interpreter memory state (S, M, C, i) plus the executed-expression
// counter. frames[d] holds the M entries of scope depth d; C and frames are
// always the same length.
struct MemoryState {
    std::vector<Value> stack;           // S
    std::vector<Frame> frames;          // M, split per open scope
    std::vector<int64_t> scope_seq;     // C: last completed SeqID per open scope
    int64_t active = 0;                 // i
    uint64_t expr_counter = 0;

    static MemoryState initial();

    size_t depth() const { return scope_seq.size(); }
};

}  // namespace mona
