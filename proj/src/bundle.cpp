#include "mona/bundle.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace mona {

using nlohmann::json;

ExecutionHash execution_hash(const std::vector<Hash32>& snapshot_hashes) {
    if (snapshot_hashes.size() < 2) throw EmptySequence();
    ExecutionHash out;
    out.components = snapshot_hashes;
    Sha256 h;
    for (const Hash32& c : snapshot_hashes) h.update(c);
    out.h = h.finish();
    return out;
}

BundleResult make_bundle(const RecordResult& recording, const Hash32& program_digest,
                         uint64_t step_size) {
    if (recording.snapshots.size() < 2) throw EmptySequence();
    BundleResult result;
    result.snapshot_hashes.reserve(recording.snapshots.size());
    for (const SnapshotBlob& s : recording.snapshots) {
        result.snapshot_hashes.push_back(sha256(s.bytes));
    }
    result.hash = execution_hash(result.snapshot_hashes);

    TraceBundle& full = result.full;
    full.program_digest = program_digest;
    full.step_size = step_size;
    full.total_expressions = recording.total_expressions;
    full.claimed_hash = result.hash.h;
    for (size_t t = 0; t + 1 < recording.snapshots.size(); ++t) {
        Trace trace;
        trace.input_index = t;
        trace.input_hash = result.snapshot_hashes[t];
        trace.s = recording.snapshots[t + 1].expr_counter - recording.snapshots[t].expr_counter;
        trace.output_hash = result.snapshot_hashes[t + 1];
        full.traces.push_back(trace);
    }

    result.redacted = full;
    result.redacted.redacted = true;
    for (Trace& t : result.redacted.traces) t.output_hash = Hash32{};
    return result;
}

std::string bundle_manifest(const TraceBundle& bundle) {
    json traces = json::array();
    for (const Trace& t : bundle.traces) {
        traces.push_back({{"inputHash", t.input_hash.hex()}, {"s", t.s}});
    }
    json doc = {
        {"claimedHash", bundle.claimed_hash.hex()},
        {"programDigest", bundle.program_digest.hex()},
        {"stepSize", bundle.step_size},
        {"totalExpressions", bundle.total_expressions},
        {"traces", std::move(traces)},
    };
    return doc.dump(2) + "\n";
}

TraceBundle parse_bundle_manifest(const std::string& text) {
    json doc = json::parse(text);
    TraceBundle b;
    b.redacted = true;
    b.claimed_hash = Hash32::from_hex(doc.at("claimedHash").get<std::string>());
    b.program_digest = Hash32::from_hex(doc.at("programDigest").get<std::string>());
    b.step_size = doc.at("stepSize").get<uint64_t>();
    b.total_expressions = doc.at("totalExpressions").get<uint64_t>();
    uint64_t index = 0;
    for (const json& t : doc.at("traces")) {
        Trace trace;
        trace.input_index = index++;
        trace.input_hash = Hash32::from_hex(t.at("inputHash").get<std::string>());
        trace.s = t.at("s").get<uint64_t>();
        b.traces.push_back(trace);
    }
    return b;
}

namespace {

constexpr char kSnapMagic[4] = {'M', 'S', 'N', '1'};

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

uint64_t get_u64(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + 8 > in.size()) throw CorruptSnapshot("truncated snapshot file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in[pos++];
    return v;
}

}  // namespace

void write_snapshot_file(const std::filesystem::path& path, const SnapshotFile& snap) {
    std::vector<uint8_t> out;
    out.reserve(64 + snap.state_bytes.size());
    out.insert(out.end(), kSnapMagic, kSnapMagic + 4);
    out.insert(out.end(), snap.program_digest.bytes.begin(), snap.program_digest.bytes.end());
    put_u64(out, snap.index);
    put_u64(out, snap.expr_counter);
    out.push_back(snap.is_final ? 1 : 0);
    put_u64(out, snap.state_bytes.size());
    out.insert(out.end(), snap.state_bytes.begin(), snap.state_bytes.end());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw BundleError("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    if (!f) throw BundleError("write failed: " + path.string());
}

SnapshotFile read_snapshot_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw BundleError("cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    size_t pos = 0;
    if (bytes.size() < 4 || memcmp(bytes.data(), kSnapMagic, 4) != 0) {
        throw CorruptSnapshot("bad snapshot magic");
    }
    pos = 4;
    SnapshotFile snap;
    if (pos + 32 > bytes.size()) throw CorruptSnapshot("truncated snapshot file");
    std::copy(bytes.begin() + pos, bytes.begin() + pos + 32, snap.program_digest.bytes.begin());
    pos += 32;
    snap.index = get_u64(bytes, pos);
    snap.expr_counter = get_u64(bytes, pos);
    if (pos >= bytes.size()) throw CorruptSnapshot("truncated snapshot file");
    snap.is_final = bytes[pos++] != 0;
    uint64_t len = get_u64(bytes, pos);
    if (pos + len != bytes.size()) throw CorruptSnapshot("snapshot length mismatch");
    snap.state_bytes.assign(bytes.begin() + pos, bytes.end());
    return snap;
}

ExecOutcome resume_snapshot(const SnapshotFile& snap, const Ast& ast, uint64_t steps,
                            const ExecOptions& opts) {
    if (snap.program_digest != ast.source_digest) throw DigestMismatch();
    MemoryState state = canonical_decode(snap.state_bytes);
    return resume(ast, std::move(state), steps, opts);
}

void write_recording(const std::filesystem::path& out_dir, const RecordResult& recording,
                     const Hash32& program_digest, uint64_t step_size) {
    std::filesystem::create_directories(out_dir);
    json hashes = json::array();
    for (const SnapshotBlob& blob : recording.snapshots) {
        SnapshotFile snap;
        snap.program_digest = program_digest;
        snap.index = blob.index;
        snap.expr_counter = blob.expr_counter;
        snap.is_final = blob.is_final;
        snap.state_bytes = blob.bytes;
        write_snapshot_file(out_dir / (std::to_string(blob.index) + ".snap"), snap);
        hashes.push_back({{"exprCounter", blob.expr_counter},
                          {"final", blob.is_final},
                          {"hash", sha256(blob.bytes).hex()},
                          {"index", blob.index}});
    }
    json doc = {
        {"programDigest", program_digest.hex()},
        {"snapshots", std::move(hashes)},
        {"stepSize", step_size},
        {"totalExpressions", recording.total_expressions},
    };
    std::ofstream f(out_dir / "manifest.json", std::ios::trunc);
    if (!f) throw BundleError("cannot write manifest");
    f << doc.dump(2) << "\n";
}

}  // namespace mona
