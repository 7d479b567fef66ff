#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mona/bundle.hpp"
#include "mona/hash.hpp"
#include "occp/graph.hpp"
#include "occp/store.hpp"

namespace occp {

using mona::Hash32;
using TaskId = int64_t;
using WorkerId = int32_t;

class UnknownTask : public std::runtime_error {
public:
    explicit UnknownTask(TaskId id) : std::runtime_error("unknown task " + std::to_string(id)) {}
};

class DuplicateInputHash : public std::runtime_error {
public:
    explicit DuplicateInputHash(const Hash32& h)
        : std::runtime_error("duplicate trace input hash " + h.hex()) {}
};

class MissingBlob : public std::runtime_error {
public:
    explicit MissingBlob(const Hash32& h)
        : std::runtime_error("blob not present in store: " + h.hex()) {}
};

class DuplicateVote : public std::runtime_error {
public:
    DuplicateVote(WorkerId w, TraceId t)
        : std::runtime_error("worker " + std::to_string(w) + " already voted on trace " +
                             std::to_string(t)) {}
};

class NoSuchAssignment : public std::runtime_error {
public:
    NoSuchAssignment(WorkerId w, TraceId t)
        : std::runtime_error("no open assignment of trace " + std::to_string(t) + " to worker " +
                             std::to_string(w)) {}
};

class VotesPending : public std::runtime_error {
public:
    VotesPending() : std::runtime_error("votes are still pending for this round") {}
};

struct ProtocolParams {
    // Quorum: an output hash needs strictly more than quorum_fraction of the
    // votes cast on its trace. 0.5 is the simple-majority rule.
    double quorum_fraction = 0.5;
    // Re-delegation rounds before giving up; 0 means unbounded, leaving worker
    // exhaustion as the terminal condition (each worker votes a trace at most
    // once, so rounds cannot exceed workerCount x traceCount).
    int max_rounds = 0;
    int worker_count = 20;
    int verifier_count = 3;
    uint64_t rng_seed = 0;
};

struct RedactedTraceView {
    TraceId id = -1;
    Hash32 input_hash;  // also the blob ref of the input state
    uint64_t s = 0;
};

struct Vote {
    TraceId trace = -1;
    WorkerId worker = -1;
    Hash32 output;
    int round = 0;
};

enum class TaskStatus : uint8_t { Open, Conflicted, Certified, Rejected };
enum class RejectReason : uint8_t { None, HashMismatch, NoQuorum, Exhausted };

const char* status_name(TaskStatus s);
const char* reject_reason_name(RejectReason r);

struct Assignment {
    TaskId task = -1;
    TraceId trace = -1;
    Hash32 input_ref;
    uint64_t s = 0;
    Hash32 program_ref;
};

struct EdgeEvidence {
    TraceId trace = -1;
    Hash32 output;
    int votes_for = 0;
    int votes_total = 0;
};

struct Certificate {
    TaskId task_id = -1;
    Hash32 claimed_h;
    Hash32 reconstructed_h;
    std::vector<Hash32> ordered_state_hashes;  // h(I_0) then quorum outputs in walk order
    std::vector<EdgeEvidence> votes_evidence;
    int rounds_used = 0;
    uint64_t ledger_tx_count = 0;
};

std::string certificate_document(const Certificate& cert);

struct LedgerRecord {
    uint64_t index = 0;
    std::string kind;  // submit / assign / vote / resolve
    Hash32 payload_digest;
};

struct TaskMetrics {
    uint64_t tx_count = 0;
    std::vector<int> votes_per_round;
    int rounds_used = 0;
    uint64_t verifier_checks = 0;
};

enum class CertifyStatus : uint8_t { Certified, Conflicted, Rejected };

struct CertifyOutcome {
    CertifyStatus status = CertifyStatus::Conflicted;
    RejectReason reject_reason = RejectReason::None;
    std::vector<TraceId> requeued;
    std::optional<Certificate> certificate;
};

struct Task {
    TaskId id = -1;
    Hash32 program_ref;
    uint64_t step_size = 0;
    Hash32 claimed_h;
    std::vector<RedactedTraceView> traces;  // seeded shuffle of the submitted order
    TaskStatus status = TaskStatus::Open;
    RejectReason reject_reason = RejectReason::None;
    int round = 1;
    ProtocolParams params;
    // Position of each trace in the submitted (pre-shuffle) bundle. Workers
    // never see it; certify uses it only to decide whether a hash mismatch is
    // final (votes confirm the submitted ordering) or still contestable.
    std::vector<int> submitted_index;

    std::vector<std::vector<Vote>> votes;              // per trace, all rounds
    std::vector<uint8_t> pending;                      // trace awaits a vote this round
    std::vector<std::optional<WorkerId>> in_flight;    // open assignment
    std::vector<std::set<WorkerId>> received;          // ever handed to (vote or abstain)
    std::vector<int> votes_per_round;
    uint64_t verifier_checks = 0;
    uint64_t tx_count = 0;
    std::optional<Certificate> certificate;

    bool terminal() const {
        return status == TaskStatus::Certified || status == TaskStatus::Rejected;
    }
    std::optional<TraceId> trace_by_input(const Hash32& h) const;
};

// The certification coordinator: a deterministic, serialized state machine
// standing in for the smart contract. Every state mutation appends one
// ledger transaction; the transaction count is the gas proxy.
class Ledger {
public:
    explicit Ledger(BlobStore& store) : store_(store) {}

    TaskId submit_task(const mona::TraceBundle& redacted, const ProtocolParams& params);
    std::optional<Assignment> request_assignment(TaskId task, WorkerId worker);
    void submit_vote(TaskId task, TraceId trace, WorkerId worker, const Hash32& output);
    // Error path: the worker hands the trace back without voting; it stays
    // excluded from that trace.
    void abstain(TaskId task, TraceId trace, WorkerId worker);

    struct ResolveResult {
        std::vector<QuorumEdge> edges;       // one per quorumed trace
        std::vector<TraceId> conflicted;     // traces without a strict majority
        std::vector<EdgeEvidence> evidence;  // tallies for quorumed traces
    };
    ResolveResult resolve_edges(TaskId task) const;

    CertifyOutcome certify(TaskId task);
    void reject_exhausted(TaskId task);

    bool all_votes_in(TaskId task) const;
    const Task& task(TaskId id) const;
    TaskMetrics ledger_metrics(TaskId id) const;

    const std::vector<LedgerRecord>& log() const { return log_; }
    Hash32 log_digest() const;
    std::string log_text() const;
    void persist_log(const std::filesystem::path& path) const;

    // Full coordinator state as key-sorted JSON, for the CLI workspace where
    // submit and certify run in separate processes.
    std::string save_state() const;
    void load_state(const std::string& json_text);

private:
    Task& task_mut(TaskId id);
    void append_tx(Task& t, const std::string& kind, const std::string& payload);

    BlobStore& store_;
    std::map<TaskId, Task> tasks_;
    TaskId next_id_ = 1;
    std::vector<LedgerRecord> log_;
    mutable std::mutex mu_;
};

}  // namespace occp
