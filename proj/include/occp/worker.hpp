#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mona/ast.hpp"
#include "occp/ledger.hpp"
#include "occp/rng.hpp"

namespace occp {

struct WorkerProfile {
    WorkerId id = 0;
    bool lazy = false;  // lazy workers vote another trace's input without executing
    uint64_t rng_seed = 0;
};

struct WorkReport {
    TraceId trace = -1;
    uint64_t executed_expressions = 0;
    Hash32 output;
    bool was_replayed = false;
    bool abstained = false;
};

// Resumes the assigned trace for s expressions and reports the hash of the
// resulting state. Blob or runtime failures turn into an abstention.
WorkReport work_honest(const Assignment& assignment, const mona::Ast& ast,
                       const BlobStore& store);

// Votes the input hash of a uniformly chosen other trace; executes nothing.
WorkReport work_lazy(const Assignment& assignment, const Task& task_view, Rng& rng);

struct PoolResult {
    TaskStatus status = TaskStatus::Open;
    RejectReason reject_reason = RejectReason::None;
    uint64_t executed_total = 0;
    std::vector<uint64_t> executed_per_worker;
    TaskMetrics metrics;
    Hash32 transcript_digest;
    std::string transcript;
    std::optional<Certificate> certificate;
    int abstentions = 0;
};

// Drives request/vote turns round-robin over workers in id order until the
// task is terminal. Deterministic for a fixed seed set.
PoolResult run_pool(Ledger& ledger, TaskId task, const std::vector<WorkerProfile>& profiles,
                    const BlobStore& store, const mona::Ast& ast);

std::vector<WorkerProfile> make_profiles(int worker_count, double lazy_fraction, uint64_t seed);

}  // namespace occp
