#include <doctest.h>

#include <map>

#include "occp/ledger.hpp"

using namespace occp;
using mona::Hash32;
using mona::sha256;

namespace {

std::vector<uint8_t> trace_blob(int i) {
    std::string s = "trace-input-" + std::to_string(i);
    return std::vector<uint8_t>(s.begin(), s.end());
}

Hash32 input_hash(int i) { return sha256("trace-input-" + std::to_string(i)); }
Hash32 terminal_hash() { return sha256("final-output"); }

// True chain is original order 0 -> 1 -> ... -> (n-1) -> terminal.
Hash32 true_output(int orig, size_t n) {
    return size_t(orig) + 1 < n ? input_hash(orig + 1) : terminal_hash();
}

Hash32 chain_claim(size_t n) {
    mona::Sha256 h;
    h.update(input_hash(0));
    for (size_t i = 0; i < n; ++i) h.update(true_output(int(i), n));
    return h.finish();
}

mona::TraceBundle synthetic_bundle(MemBlobStore& store, size_t n, Hash32 claimed) {
    mona::TraceBundle bundle;
    bundle.redacted = true;
    bundle.program_digest = store.put(std::string_view("program-source")).hash;
    bundle.step_size = 10;
    bundle.total_expressions = 10 * n;
    bundle.claimed_hash = claimed;
    for (size_t i = 0; i < n; ++i) {
        store.put(trace_blob(int(i)));
        mona::Trace t;
        t.input_index = i;
        t.input_hash = input_hash(int(i));
        t.s = 10;
        bundle.traces.push_back(t);
    }
    return bundle;
}

int orig_of(const Task& task, TraceId id, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        if (task.traces[size_t(id)].input_hash == input_hash(int(i))) return int(i);
    }
    return -1;
}

// Scripted pool: each round every worker takes at most one assignment and
// votes vote_fn(original_index, round).
CertifyOutcome drive(Ledger& ledger, TaskId task, size_t n, int workers,
                     const std::function<Hash32(int, int)>& vote_fn, int max_loops = 64) {
    CertifyOutcome outcome;
    for (int loop = 0; loop < max_loops; ++loop) {
        bool any = false;
        for (WorkerId w = 0; w < workers; ++w) {
            auto assignment = ledger.request_assignment(task, w);
            if (!assignment) continue;
            any = true;
            int orig = orig_of(ledger.task(task), assignment->trace, n);
            int round = ledger.task(task).round;
            ledger.submit_vote(task, assignment->trace, w, vote_fn(orig, round));
        }
        if (ledger.all_votes_in(task)) {
            outcome = ledger.certify(task);
            if (outcome.status != CertifyStatus::Conflicted) return outcome;
        } else if (!any) {
            ledger.reject_exhausted(task);
            outcome.status = CertifyStatus::Rejected;
            outcome.reject_reason = RejectReason::Exhausted;
            return outcome;
        }
    }
    FAIL("scripted pool did not terminate");
    return outcome;
}

}  // namespace

TEST_CASE("submit validates blobs and distinct input hashes") {
    MemBlobStore store;
    mona::TraceBundle bundle = synthetic_bundle(store, 3, chain_claim(3));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 4;
    TaskId id = ledger.submit_task(bundle, params);
    const Task& t = ledger.task(id);
    CHECK(t.status == TaskStatus::Open);
    CHECK(t.round == 1);
    CHECK(t.traces.size() == 3);
    CHECK(t.tx_count == 1);

    // Degenerate bundle: duplicated input hash.
    mona::TraceBundle dup = bundle;
    dup.traces.push_back(dup.traces[0]);
    CHECK_THROWS_AS(ledger.submit_task(dup, params), DuplicateInputHash);

    // Unresolvable blob ref.
    mona::TraceBundle missing = bundle;
    mona::Trace ghost;
    ghost.input_hash = sha256("never stored");
    ghost.s = 10;
    missing.traces.push_back(ghost);
    CHECK_THROWS_AS(ledger.submit_task(missing, params), MissingBlob);

    // Single-trace bundles are fine.
    MemBlobStore store1;
    mona::TraceBundle one = synthetic_bundle(store1, 1, chain_claim(1));
    Ledger ledger1(store1);
    CHECK_NOTHROW(ledger1.submit_task(one, params));

    CHECK_THROWS_AS(ledger.task(999), UnknownTask);
}

TEST_CASE("assignment policy") {
    MemBlobStore store;
    mona::TraceBundle bundle = synthetic_bundle(store, 3, chain_claim(3));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 4;
    TaskId id = ledger.submit_task(bundle, params);

    // Fresh task, fresh worker: lowest-index pending trace.
    auto a0 = ledger.request_assignment(id, 0);
    REQUIRE(a0);
    CHECK(a0->trace == 0);
    CHECK(a0->s == 10);
    CHECK(a0->program_ref == bundle.program_digest);

    // Same worker asks again: trace 0 is in flight, gets the next one.
    auto a1 = ledger.request_assignment(id, 0);
    REQUIRE(a1);
    CHECK(a1->trace == 1);
    auto a2 = ledger.request_assignment(id, 1);
    REQUIRE(a2);
    CHECK(a2->trace == 2);

    // Everything in flight: nothing eligible.
    CHECK(!ledger.request_assignment(id, 2));
}

TEST_CASE("vote bookkeeping errors") {
    MemBlobStore store;
    mona::TraceBundle bundle = synthetic_bundle(store, 2, chain_claim(2));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 3;
    TaskId id = ledger.submit_task(bundle, params);

    auto a = ledger.request_assignment(id, 0);
    REQUIRE(a);
    // Voting without holding the assignment.
    CHECK_THROWS_AS(ledger.submit_vote(id, a->trace, 1, input_hash(9)), NoSuchAssignment);
    ledger.submit_vote(id, a->trace, 0, input_hash(9));
    // Duplicate (worker, trace) across rounds.
    CHECK_THROWS_AS(ledger.submit_vote(id, a->trace, 0, input_hash(9)), DuplicateVote);
    // Worker 0 is never handed trace a->trace again.
    auto next = ledger.request_assignment(id, 0);
    REQUIRE(next);
    CHECK(next->trace != a->trace);
}

TEST_CASE("happy path certifies and follows the tx accounting") {
    for (size_t n : {size_t(1), size_t(3), size_t(7)}) {
        MemBlobStore store;
        mona::TraceBundle bundle = synthetic_bundle(store, n, chain_claim(n));
        Ledger ledger(store);
        ProtocolParams params;
        params.worker_count = 4;
        params.rng_seed = 77;
        TaskId id = ledger.submit_task(bundle, params);
        CertifyOutcome out =
            drive(ledger, id, n, 4, [&](int orig, int) { return true_output(orig, n); });
        REQUIRE(out.status == CertifyStatus::Certified);
        REQUIRE(out.certificate);
        CHECK(out.certificate->reconstructed_h == chain_claim(n));
        CHECK(out.certificate->ordered_state_hashes.size() == n + 1);
        CHECK(out.certificate->rounds_used == 1);
        // txCount = submit + n assignments + n votes + resolution.
        TaskMetrics m = ledger.ledger_metrics(id);
        CHECK(m.tx_count == 2 * n + 2);
        CHECK(m.rounds_used == 1);
        CHECK(m.votes_per_round == std::vector<int>{int(n)});
        CHECK(ledger.task(id).status == TaskStatus::Certified);

        // Votes after the task closed are rejected.
        CHECK_THROWS_AS(ledger.submit_vote(id, 0, 3, terminal_hash()), NoSuchAssignment);
    }
}

TEST_CASE("certificate document is key-sorted json") {
    MemBlobStore store;
    mona::TraceBundle bundle = synthetic_bundle(store, 2, chain_claim(2));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 2;
    TaskId id = ledger.submit_task(bundle, params);
    CertifyOutcome out =
        drive(ledger, id, 2, 2, [&](int orig, int) { return true_output(orig, 2); });
    REQUIRE(out.certificate);
    std::string doc = certificate_document(*out.certificate);
    CHECK(doc.find("\"claimedH\"") < doc.find("\"reconstructedH\""));
    CHECK(doc.find("\"reconstructedH\"") < doc.find("\"taskId\""));
}

TEST_CASE("tampered claim is rejected after full reconstruction") {
    MemBlobStore store;
    mona::TraceBundle bundle = synthetic_bundle(store, 4, sha256("not the real claim"));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 5;
    TaskId id = ledger.submit_task(bundle, params);
    CertifyOutcome out =
        drive(ledger, id, 4, 5, [&](int orig, int) { return true_output(orig, 4); });
    CHECK(out.status == CertifyStatus::Rejected);
    CHECK(out.reject_reason == RejectReason::HashMismatch);
    CHECK(ledger.task(id).status == TaskStatus::Rejected);
}

TEST_CASE("conflicts re-delegate to fresh workers until quorum") {
    // Original trace 0 first draws a junk vote (a second terminal edge), which
    // implicates both terminal-edge sources. The tie then needs a third vote.
    MemBlobStore store;
    size_t n = 3;
    mona::TraceBundle bundle = synthetic_bundle(store, n, chain_claim(n));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 8;
    TaskId id = ledger.submit_task(bundle, params);

    bool junk_cast = false;
    auto vote_fn = [&](int orig, int round) {
        if (orig == 0 && round == 1 && !junk_cast) {
            junk_cast = true;
            return sha256("junk-output");
        }
        return true_output(orig, n);
    };
    CertifyOutcome out = drive(ledger, id, n, 8, vote_fn);
    REQUIRE(out.status == CertifyStatus::Certified);
    TaskMetrics m = ledger.ledger_metrics(id);
    CHECK(m.rounds_used == 3);
    // Round 1: all three traces. Round 2: the two terminal-edge sources.
    // Round 3: the tied trace only.
    CHECK(m.votes_per_round == std::vector<int>{3, 2, 1});
    // Quorum monotonicity: trace orig-0 ended {junk, true, true}.
    const Task& t = ledger.task(id);
    int orig0_votes = 0;
    for (const auto& votes : t.votes) orig0_votes = std::max(orig0_votes, int(votes.size()));
    CHECK(orig0_votes == 3);
}

TEST_CASE("max rounds exhaustion rejects with no quorum") {
    MemBlobStore store;
    size_t n = 2;
    mona::TraceBundle bundle = synthetic_bundle(store, n, chain_claim(n));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 8;
    params.max_rounds = 3;
    TaskId id = ledger.submit_task(bundle, params);

    // Trace 0 receives a different junk hash every round: never a majority.
    auto vote_fn = [&](int orig, int round) {
        if (orig == 0) return sha256("junk-" + std::to_string(round));
        return true_output(orig, n);
    };
    CertifyOutcome out = drive(ledger, id, n, 8, vote_fn);
    CHECK(out.status == CertifyStatus::Rejected);
    CHECK(out.reject_reason == RejectReason::NoQuorum);
    CHECK(ledger.ledger_metrics(id).rounds_used == 3);
}

TEST_CASE("resolve quorum rules") {
    MemBlobStore store;
    size_t n = 3;
    mona::TraceBundle bundle = synthetic_bundle(store, n, chain_claim(n));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 8;
    TaskId id = ledger.submit_task(bundle, params);

    // Round 1: single honest vote per trace is a 1-of-1 majority.
    for (WorkerId w = 0; w < 3; ++w) {
        auto a = ledger.request_assignment(id, w);
        REQUIRE(a);
        ledger.submit_vote(id, a->trace, w, true_output(orig_of(ledger.task(id), a->trace, n), n));
    }
    Ledger::ResolveResult r = ledger.resolve_edges(id);
    CHECK(r.edges.size() == 3);
    CHECK(r.conflicted.empty());
    for (const EdgeEvidence& e : r.evidence) {
        CHECK(e.votes_for == 1);
        CHECK(e.votes_total == 1);
    }
}

TEST_CASE("resolve rejects while votes are outstanding") {
    MemBlobStore store;
    mona::TraceBundle bundle = synthetic_bundle(store, 2, chain_claim(2));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 2;
    TaskId id = ledger.submit_task(bundle, params);
    CHECK_THROWS_AS(ledger.resolve_edges(id), VotesPending);
    auto a = ledger.request_assignment(id, 0);
    REQUIRE(a);
    CHECK_THROWS_AS(ledger.resolve_edges(id), VotesPending);  // in flight
}

TEST_CASE("exhaustive n <= 4 vote maps through the ledger match the chain oracle") {
    for (size_t n = 1; n <= 4; ++n) {
        uint64_t options = n + 1;
        uint64_t total = 1;
        for (size_t i = 0; i < n; ++i) total *= options;
        for (uint64_t code = 0; code < total; ++code) {
            uint64_t rest = code;
            std::vector<int> vote(n);
            for (size_t i = 0; i < n; ++i) {
                uint64_t pick = rest % options;
                rest /= options;
                vote[i] = pick == n ? -1 : int(pick);
            }
            // Independent oracle on the same map.
            std::vector<QuorumEdge> edges;
            for (size_t i = 0; i < n; ++i) {
                QuorumEdge e;
                e.src = TraceId(i);
                if (vote[i] < 0) {
                    e.out = terminal_hash();
                } else {
                    e.out = input_hash(vote[i]);
                    e.dst = TraceId(vote[i]);
                }
                edges.push_back(e);
            }
            bool oracle = is_permutation_chain(n, edges);

            // For chain maps, compute the claim the walk implies so the accept
            // path is exercised end to end; non-chains get a junk claim.
            Hash32 claim = sha256("irrelevant claim");
            if (oracle) {
                std::vector<uint8_t> in_image(n, 0);
                for (int v : vote) {
                    if (v >= 0) in_image[size_t(v)] = 1;
                }
                int head = -1;
                for (size_t i = 0; i < n; ++i) {
                    if (!in_image[i]) head = int(i);
                }
                mona::Sha256 h;
                h.update(input_hash(head));
                for (int cur = head; cur >= 0; cur = vote[size_t(cur)]) {
                    h.update(vote[size_t(cur)] < 0 ? terminal_hash() : input_hash(vote[size_t(cur)]));
                }
                claim = h.finish();
            }

            MemBlobStore store;
            mona::TraceBundle bundle = synthetic_bundle(store, n, claim);
            Ledger ledger(store);
            ProtocolParams params;
            params.worker_count = int(n);
            params.max_rounds = 1;
            params.rng_seed = code;
            TaskId id = ledger.submit_task(bundle, params);
            for (WorkerId w = 0; w < int(n); ++w) {
                auto a = ledger.request_assignment(id, w);
                REQUIRE(a);
                int orig = orig_of(ledger.task(id), a->trace, n);
                Hash32 out = vote[size_t(orig)] < 0 ? terminal_hash()
                                                    : input_hash(vote[size_t(orig)]);
                ledger.submit_vote(id, a->trace, w, out);
            }
            CertifyOutcome out = ledger.certify(id);
            // With the walk-implied claim, every permutation chain certifies;
            // everything else stays in conflict.
            bool accepted = out.status == CertifyStatus::Certified;
            CAPTURE(n);
            CAPTURE(code);
            CHECK(accepted == oracle);
        }
    }
}

TEST_CASE("coinciding wrong votes that rearrange the chain reconcile instead of rejecting") {
    // True chain 0 -> 1 -> 2 -> O. Lazy votes 0 -> 2 and 1 -> 0 form the valid
    // but wrong chain 1 -> 0 -> 2 -> O; the mismatch must trigger
    // re-delegation of the deviating traces and end in certification.
    MemBlobStore store;
    size_t n = 3;
    mona::TraceBundle bundle = synthetic_bundle(store, n, chain_claim(n));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 8;
    TaskId id = ledger.submit_task(bundle, params);

    auto vote_fn = [&](int orig, int round) {
        if (round == 1 && orig == 0) return input_hash(2);
        if (round == 1 && orig == 1) return input_hash(0);
        return true_output(orig, n);
    };
    CertifyOutcome out = drive(ledger, id, n, 8, vote_fn);
    REQUIRE(out.status == CertifyStatus::Certified);
    REQUIRE(out.certificate);
    CHECK(out.certificate->reconstructed_h == chain_claim(n));
    // Round 1 built the wrong chain; rounds 2 and 3 broke the two ties.
    CHECK(ledger.ledger_metrics(id).rounds_used == 3);
}

TEST_CASE("ledger log is append-only deterministic text") {
    auto build = [] {
        MemBlobStore store;
        mona::TraceBundle bundle = synthetic_bundle(store, 3, chain_claim(3));
        Ledger ledger(store);
        ProtocolParams params;
        params.worker_count = 4;
        params.rng_seed = 5;
        TaskId id = ledger.submit_task(bundle, params);
        drive(ledger, id, 3, 4, [&](int orig, int) { return true_output(orig, 3); });
        return ledger.log_digest();
    };
    CHECK(build() == build());

    MemBlobStore store;
    mona::TraceBundle bundle = synthetic_bundle(store, 2, chain_claim(2));
    Ledger ledger(store);
    ProtocolParams params;
    params.worker_count = 2;
    TaskId id = ledger.submit_task(bundle, params);
    std::string text = ledger.log_text();
    CHECK(text.find("0\tsubmit\t") == 0);
    size_t before = ledger.log().size();
    ledger.request_assignment(id, 0);
    CHECK(ledger.log().size() == before + 1);
    CHECK(ledger.log_text().find(text) == 0);  // previous records unchanged
}
