#include "occp/worker.hpp"

#include <sstream>

#include "mona/codec.hpp"
#include "mona/interp.hpp"

namespace occp {

WorkReport work_honest(const Assignment& assignment, const mona::Ast& ast,
                       const BlobStore& store) {
    WorkReport report;
    report.trace = assignment.trace;
    try {
        std::vector<uint8_t> blob = store.get(assignment.input_ref);
        mona::MemoryState state = mona::canonical_decode(blob);
        mona::ExecOutcome out = mona::resume(ast, std::move(state), assignment.s);
        report.executed_expressions = out.executed;
        report.output = mona::state_hash(out.state);
        report.was_replayed = true;
    } catch (const std::exception&) {
        report.abstained = true;  // blob integrity or runtime failure: no vote
    }
    return report;
}

WorkReport work_lazy(const Assignment& assignment, const Task& task_view, Rng& rng) {
    WorkReport report;
    report.trace = assignment.trace;
    report.was_replayed = false;
    report.executed_expressions = 0;
    size_t n = task_view.traces.size();
    if (n < 2) {
        // Degenerate single-trace task: the only available vote is its own input.
        report.output = task_view.traces[0].input_hash;
        return report;
    }
    uint64_t pick = rng.below(n - 1);
    if (TraceId(pick) >= assignment.trace) pick++;
    report.output = task_view.traces[size_t(pick)].input_hash;
    return report;
}

std::vector<WorkerProfile> make_profiles(int worker_count, double lazy_fraction, uint64_t seed) {
    int lazy_count = int(double(worker_count) * lazy_fraction + 1e-9);
    // Seeded choice of which worker ids are lazy.
    std::vector<int> ids(static_cast<size_t>(worker_count), 0);
    for (int i = 0; i < worker_count; ++i) ids[size_t(i)] = i;
    Rng rng(Rng::mix(seed, 0x6c617a79ull));
    for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[size_t(rng.below(i))]);

    std::vector<WorkerProfile> profiles(static_cast<size_t>(worker_count), WorkerProfile{});
    for (int i = 0; i < worker_count; ++i) {
        profiles[size_t(i)].id = i;
        profiles[size_t(i)].rng_seed = Rng::mix(seed, 0x776f726bull + uint64_t(i));
    }
    for (int k = 0; k < lazy_count; ++k) profiles[size_t(ids[size_t(k)])].lazy = true;
    return profiles;
}

PoolResult run_pool(Ledger& ledger, TaskId task, const std::vector<WorkerProfile>& profiles,
                    const BlobStore& store, const mona::Ast& ast) {
    PoolResult result;
    result.executed_per_worker.assign(profiles.size(), 0);
    std::ostringstream transcript;

    std::vector<Rng> rngs;
    rngs.reserve(profiles.size());
    for (const WorkerProfile& p : profiles) rngs.emplace_back(p.rng_seed);

    for (;;) {
        bool any_assignment = false;
        for (size_t w = 0; w < profiles.size(); ++w) {
            const WorkerProfile& profile = profiles[w];
            std::optional<Assignment> assignment = ledger.request_assignment(task, profile.id);
            if (!assignment) continue;
            any_assignment = true;
            transcript << "assign worker=" << profile.id << " trace=" << assignment->trace << "\n";
            WorkReport report;
            if (profile.lazy) {
                report = work_lazy(*assignment, ledger.task(task), rngs[w]);
            } else {
                report = work_honest(*assignment, ast, store);
            }
            result.executed_total += report.executed_expressions;
            result.executed_per_worker[w] += report.executed_expressions;
            if (report.abstained) {
                result.abstentions++;
                ledger.abstain(task, assignment->trace, profile.id);
                transcript << "abstain worker=" << profile.id << " trace=" << assignment->trace
                           << "\n";
            } else {
                ledger.submit_vote(task, assignment->trace, profile.id, report.output);
                transcript << "vote worker=" << profile.id << " trace=" << assignment->trace
                           << " hash=" << report.output.hex() << "\n";
            }
        }

        if (ledger.all_votes_in(task)) {
            CertifyOutcome outcome = ledger.certify(task);
            if (outcome.status == CertifyStatus::Conflicted) {
                transcript << "round requeued=" << outcome.requeued.size() << "\n";
                continue;
            }
            break;
        }
        if (!any_assignment) {
            // Every pending trace has been seen by every worker: nothing left to try.
            ledger.reject_exhausted(task);
            transcript << "exhausted\n";
            break;
        }
    }

    const Task& t = ledger.task(task);
    result.status = t.status;
    result.reject_reason = t.reject_reason;
    result.metrics = ledger.ledger_metrics(task);
    result.certificate = t.certificate;
    transcript << "final status=" << status_name(t.status)
               << " reason=" << reject_reason_name(t.reject_reason) << "\n";
    result.transcript = transcript.str();
    result.transcript_digest = mona::sha256(result.transcript);
    return result;
}

}  // namespace occp
