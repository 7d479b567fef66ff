#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mona/ast.hpp"
#include "mona/codec.hpp"
#include "mona/state.hpp"

namespace mona {

enum class RuntimeErrorKind : uint8_t {
    TypeError,
    IndexOutOfBounds,
    DivisionByZero,
    UndefinedIdentifier,
    UndefinedFunction,
    StackUnderflow,
    RecursionLimit,
    ReturnOutsideFunction,
    ArityMismatch,
    Redeclaration,
};

class RuntimeError : public std::runtime_error {
public:
    RuntimeError(RuntimeErrorKind kind, int64_t seq, uint32_t line, uint32_t col,
                 const std::string& msg)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg +
                             " (seq " + std::to_string(seq) + ")"),
          kind(kind),
          seq(seq),
          line(line),
          col(col) {}

    RuntimeErrorKind kind;
    int64_t seq;  // SeqID of the nearest evaluable node
    uint32_t line;
    uint32_t col;
};

class DigestMismatch : public std::runtime_error {
public:
    DigestMismatch() : std::runtime_error("snapshot program digest does not match AST source") {}
};

struct ExecOptions {
    int64_t recursion_limit = 100000;
    // Called after every completion and scope transition; used by tests that
    // follow the C/i trajectory.
    std::function<void(const MemoryState&)> observer;
};

struct ExecOutcome {
    MemoryState state;
    std::string output;
    uint64_t executed = 0;  // completions performed by this run
};

// In-memory snapshot emitted during record(): the canonical state encoding
// plus the counter it was taken at.
struct SnapshotBlob {
    std::vector<uint8_t> bytes;
    uint64_t expr_counter = 0;
    uint64_t index = 0;
    bool is_final = false;
};

struct RecordResult {
    std::vector<SnapshotBlob> snapshots;  // initial first, final last
    std::string output;
    uint64_t total_expressions = 0;
};

// Plain evaluation from a fresh state.
ExecOutcome execute(const Ast& ast, const ExecOptions& opts = {});

// Evaluation that captures the state at every `step` completions, plus the
// initial and final states (the final one exactly once when E is a multiple
// of step). Snapshot count follows 2 + floor((E-1)/step) for E >= 1.
RecordResult record(const Ast& ast, uint64_t step, const ExecOptions& opts = {});

// Resumes evaluation from a recorded state for `steps` further completions
// (or to program end), pruning subtrees already covered by C.
ExecOutcome resume(const Ast& ast, MemoryState from, uint64_t steps,
                   const ExecOptions& opts = {});

// Closed form for the number of snapshots record() emits.
uint64_t expected_snapshot_count(uint64_t total_expressions, uint64_t step);

}  // namespace mona
