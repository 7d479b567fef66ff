#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mona/hash.hpp"
#include "mona/interp.hpp"

namespace mona {

class EmptySequence : public std::runtime_error {
public:
    EmptySequence() : std::runtime_error("execution hash needs at least two snapshots") {}
};

class BundleError : public std::runtime_error {
public:
    explicit BundleError(const std::string& msg) : std::runtime_error(msg) {}
};

// H = SHA-256 over the concatenated raw 32-byte state digests of
// (I_0, O_0, ..., O_n), one component hash per snapshot.
struct ExecutionHash {
    Hash32 h;
    std::vector<Hash32> components;
};

ExecutionHash execution_hash(const std::vector<Hash32>& snapshot_hashes);

// One trace of a recorded run: resuming the program from the snapshot at
// `input_index` for `s` completions yields the snapshot at `input_index + 1`.
struct Trace {
    uint64_t input_index = 0;
    Hash32 input_hash;
    uint64_t s = 0;
    Hash32 output_hash;  // zeroed in the redacted form
};

struct TraceBundle {
    Hash32 program_digest;
    uint64_t step_size = 0;
    uint64_t total_expressions = 0;
    bool redacted = false;
    std::vector<Trace> traces;
    Hash32 claimed_hash;
};

struct BundleResult {
    TraceBundle full;
    TraceBundle redacted;
    ExecutionHash hash;
    std::vector<Hash32> snapshot_hashes;  // one per snapshot, in order
};

// Builds the trace bundle, its redacted form, and the execution hash from one
// record() run. n+1 snapshots produce n traces.
BundleResult make_bundle(const RecordResult& recording, const Hash32& program_digest,
                         uint64_t step_size);

// Key-sorted JSON manifest of the redacted bundle: programDigest, stepSize,
// ordered trace records {inputHash, s}, claimedHash.
std::string bundle_manifest(const TraceBundle& bundle);
TraceBundle parse_bundle_manifest(const std::string& text);

// Snapshot persistence: `<outDir>/<index>.snap` holds a small header plus the
// canonical state bytes; `manifest.json` lists ordered snapshot hashes, step
// size, program digest, and the total expression count.
struct SnapshotFile {
    Hash32 program_digest;
    uint64_t index = 0;
    uint64_t expr_counter = 0;
    bool is_final = false;
    std::vector<uint8_t> state_bytes;
};

void write_snapshot_file(const std::filesystem::path& path, const SnapshotFile& snap);
SnapshotFile read_snapshot_file(const std::filesystem::path& path);

// Digest-checked resume from a persisted snapshot. Throws DigestMismatch when
// the snapshot was recorded from a different source, CorruptSnapshot when the
// state bytes fail to decode.
ExecOutcome resume_snapshot(const SnapshotFile& snap, const Ast& ast, uint64_t steps,
                            const ExecOptions& opts = {});

void write_recording(const std::filesystem::path& out_dir, const RecordResult& recording,
                     const Hash32& program_digest, uint64_t step_size);

}  // namespace mona
