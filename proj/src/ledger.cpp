#include "occp/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "occp/rng.hpp"

namespace occp {

using nlohmann::json;

const char* status_name(TaskStatus s) {
    switch (s) {
        case TaskStatus::Open: return "open";
        case TaskStatus::Conflicted: return "conflicted";
        case TaskStatus::Certified: return "certified";
        case TaskStatus::Rejected: return "rejected";
    }
    return "?";
}

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::None: return "none";
        case RejectReason::HashMismatch: return "hash-mismatch";
        case RejectReason::NoQuorum: return "no-quorum";
        case RejectReason::Exhausted: return "exhausted";
    }
    return "?";
}

std::optional<TraceId> Task::trace_by_input(const Hash32& h) const {
    for (const RedactedTraceView& t : traces) {
        if (t.input_hash == h) return t.id;
    }
    return std::nullopt;
}

std::string certificate_document(const Certificate& cert) {
    json hashes = json::array();
    for (const Hash32& h : cert.ordered_state_hashes) hashes.push_back(h.hex());
    json evidence = json::array();
    for (const EdgeEvidence& e : cert.votes_evidence) {
        evidence.push_back({{"outputHash", e.output.hex()},
                            {"traceId", e.trace},
                            {"votesFor", e.votes_for},
                            {"votesTotal", e.votes_total}});
    }
    json doc = {
        {"claimedH", cert.claimed_h.hex()},
        {"orderedStateHashes", std::move(hashes)},
        {"reconstructedH", cert.reconstructed_h.hex()},
        {"roundsUsed", cert.rounds_used},
        {"taskId", cert.task_id},
        {"txCount", cert.ledger_tx_count},
        {"votesEvidence", std::move(evidence)},
    };
    return doc.dump(2) + "\n";
}

void Ledger::append_tx(Task& t, const std::string& kind, const std::string& payload) {
    LedgerRecord rec;
    rec.index = log_.size();
    rec.kind = kind;
    rec.payload_digest = mona::sha256(payload);
    log_.push_back(std::move(rec));
    t.tx_count++;
}

Task& Ledger::task_mut(TaskId id) {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw UnknownTask(id);
    return it->second;
}

const Task& Ledger::task(TaskId id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw UnknownTask(id);
    return it->second;
}

TaskId Ledger::submit_task(const mona::TraceBundle& redacted, const ProtocolParams& params) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!store_.contains(redacted.program_digest)) throw MissingBlob(redacted.program_digest);
    std::set<Hash32> seen;
    for (const mona::Trace& t : redacted.traces) {
        if (!seen.insert(t.input_hash).second) throw DuplicateInputHash(t.input_hash);
        if (!store_.contains(t.input_hash)) throw MissingBlob(t.input_hash);
    }

    Task task;
    task.id = next_id_++;
    task.program_ref = redacted.program_digest;
    task.step_size = redacted.step_size;
    task.claimed_h = redacted.claimed_hash;
    task.params = params;

    // Workers receive the traces in an unordered (seeded shuffle) layout; the
    // chain is recoverable only through re-execution.
    std::vector<size_t> order(redacted.traces.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(Rng::mix(params.rng_seed, 0x7261636573ull));
    for (size_t i = order.size(); i > 1; --i) {
        size_t j = size_t(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    for (size_t i = 0; i < order.size(); ++i) {
        RedactedTraceView view;
        view.id = TraceId(i);
        view.input_hash = redacted.traces[order[i]].input_hash;
        view.s = redacted.traces[order[i]].s;
        task.traces.push_back(view);
        task.submitted_index.push_back(int(order[i]));
    }

    size_t n = task.traces.size();
    task.votes.resize(n);
    task.pending.assign(n, 1);
    task.in_flight.resize(n);
    task.received.resize(n);
    task.votes_per_round.push_back(0);

    TaskId id = task.id;
    auto [it, inserted] = tasks_.emplace(id, std::move(task));
    append_tx(it->second, "submit",
              "submit|task=" + std::to_string(id) + "|program=" + redacted.program_digest.hex() +
                  "|claimed=" + redacted.claimed_hash.hex() +
                  "|traces=" + std::to_string(n) + "|step=" + std::to_string(redacted.step_size));
    return id;
}

std::optional<Assignment> Ledger::request_assignment(TaskId task_id, WorkerId worker) {
    std::lock_guard<std::mutex> lock(mu_);
    Task& t = task_mut(task_id);
    if (t.terminal()) return std::nullopt;
    for (const RedactedTraceView& trace : t.traces) {
        size_t i = size_t(trace.id);
        if (!t.pending[i] || t.in_flight[i]) continue;
        if (t.received[i].count(worker)) continue;  // never the same trace twice
        t.in_flight[i] = worker;
        t.received[i].insert(worker);
        append_tx(t, "assign",
                  "assign|task=" + std::to_string(task_id) + "|trace=" + std::to_string(trace.id) +
                      "|worker=" + std::to_string(worker) + "|round=" + std::to_string(t.round));
        Assignment a;
        a.task = task_id;
        a.trace = trace.id;
        a.input_ref = trace.input_hash;
        a.s = trace.s;
        a.program_ref = t.program_ref;
        return a;
    }
    return std::nullopt;
}

void Ledger::submit_vote(TaskId task_id, TraceId trace, WorkerId worker, const Hash32& output) {
    std::lock_guard<std::mutex> lock(mu_);
    Task& t = task_mut(task_id);
    if (trace < 0 || size_t(trace) >= t.traces.size()) throw NoSuchAssignment(worker, trace);
    for (const Vote& v : t.votes[size_t(trace)]) {
        if (v.worker == worker) throw DuplicateVote(worker, trace);
    }
    if (t.terminal() || t.in_flight[size_t(trace)] != worker) throw NoSuchAssignment(worker, trace);
    t.in_flight[size_t(trace)].reset();
    t.pending[size_t(trace)] = 0;
    t.votes[size_t(trace)].push_back({trace, worker, output, t.round});
    t.votes_per_round.back()++;
    append_tx(t, "vote",
              "vote|task=" + std::to_string(task_id) + "|trace=" + std::to_string(trace) +
                  "|worker=" + std::to_string(worker) + "|hash=" + output.hex() +
                  "|round=" + std::to_string(t.round));
}

void Ledger::abstain(TaskId task_id, TraceId trace, WorkerId worker) {
    std::lock_guard<std::mutex> lock(mu_);
    Task& t = task_mut(task_id);
    if (trace < 0 || size_t(trace) >= t.traces.size() || t.in_flight[size_t(trace)] != worker) {
        throw NoSuchAssignment(worker, trace);
    }
    t.in_flight[size_t(trace)].reset();  // stays pending; worker stays excluded
}

bool Ledger::all_votes_in(TaskId task_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    const Task& t = task(task_id);
    for (size_t i = 0; i < t.traces.size(); ++i) {
        if (t.pending[i] || t.in_flight[i]) return false;
    }
    return true;
}

Ledger::ResolveResult Ledger::resolve_edges(TaskId task_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    const Task& t = task(task_id);
    for (size_t i = 0; i < t.traces.size(); ++i) {
        if (t.pending[i] || t.in_flight[i]) throw VotesPending();
    }
    ResolveResult result;
    for (const RedactedTraceView& trace : t.traces) {
        const auto& votes = t.votes[size_t(trace.id)];
        // Tally all rounds' votes per output hash.
        std::map<Hash32, int> tally;
        for (const Vote& v : votes) tally[v.output]++;
        const Hash32* quorum_hash = nullptr;
        int best = 0;
        for (const auto& [hash, count] : tally) {
            if (double(count) > t.params.quorum_fraction * double(votes.size())) {
                quorum_hash = &hash;
                best = count;
            }
        }
        if (!quorum_hash) {
            result.conflicted.push_back(trace.id);
            continue;
        }
        QuorumEdge edge;
        edge.src = trace.id;
        edge.out = *quorum_hash;
        edge.dst = t.trace_by_input(*quorum_hash);
        result.edges.push_back(edge);
        result.evidence.push_back({trace.id, *quorum_hash, best, int(votes.size())});
    }
    return result;
}

CertifyOutcome Ledger::certify(TaskId task_id) {
    ResolveResult resolved = resolve_edges(task_id);

    std::lock_guard<std::mutex> lock(mu_);
    Task& t = task_mut(task_id);
    if (t.terminal()) throw UnknownTask(task_id);

    std::set<TraceId> conflicted(resolved.conflicted.begin(), resolved.conflicted.end());

    // Verifier duty: the conflict checks and the reconstruction walk, executed
    // by verifier_count logical verifiers with identical deterministic results.
    t.verifier_checks += uint64_t(t.params.verifier_count);
    GraphCheckResult checks = check_graph(t.traces.size(), resolved.edges);
    for (TraceId id : checks.implicated_sources()) conflicted.insert(id);

    Reconstruction rec;
    if (conflicted.empty()) {
        rec = reconstruct_sequence(t.traces.size(), resolved.edges);
        if (!rec.ok) {
            for (TraceId id : rec.implicated) conflicted.insert(id);
        }
    }

    CertifyOutcome outcome;
    if (conflicted.empty() && rec.ok) {
        // H' over h(I_0) of the head plus the quorum outputs in walk order.
        std::vector<Hash32> sequence;
        sequence.push_back(t.traces[size_t(rec.order.front())].input_hash);
        std::map<TraceId, const QuorumEdge*> edge_by_src;
        for (const QuorumEdge& e : resolved.edges) edge_by_src[e.src] = &e;
        for (TraceId id : rec.order) sequence.push_back(edge_by_src[id]->out);
        mona::Sha256 h;
        for (const Hash32& s : sequence) h.update(s);
        Hash32 reconstructed = h.finish();

        if (reconstructed == t.claimed_h) {
            t.status = TaskStatus::Certified;
            Certificate cert;
            cert.task_id = t.id;
            cert.claimed_h = t.claimed_h;
            cert.reconstructed_h = reconstructed;
            cert.ordered_state_hashes = std::move(sequence);
            cert.votes_evidence = resolved.evidence;
            cert.rounds_used = t.round;
            append_tx(t, "resolve",
                      "resolve|task=" + std::to_string(t.id) + "|round=" + std::to_string(t.round) +
                          "|status=certified|h=" + reconstructed.hex());
            cert.ledger_tx_count = t.tx_count;
            t.certificate = cert;
            outcome.status = CertifyStatus::Certified;
            outcome.certificate = std::move(cert);
            return outcome;
        }
        // The hash differs. When the quorum edges deviate from the submitted
        // ordering, coinciding wrong votes may have rearranged the chain into
        // another valid permutation; such traces are re-delegated and the
        // mismatch is only final once the votes confirm the submitted order
        // (or nothing is left to contest).
        for (const QuorumEdge& e : resolved.edges) {
            int idx = t.submitted_index[size_t(e.src)];
            bool last = idx + 1 == int(t.traces.size());
            bool matches;
            if (last) {
                matches = !e.dst.has_value();
            } else {
                matches = e.dst.has_value() && t.submitted_index[size_t(*e.dst)] == idx + 1;
            }
            if (!matches) conflicted.insert(e.src);
        }
        if (conflicted.empty()) {
            t.status = TaskStatus::Rejected;
            t.reject_reason = RejectReason::HashMismatch;
            append_tx(t, "resolve",
                      "resolve|task=" + std::to_string(t.id) + "|round=" + std::to_string(t.round) +
                          "|status=rejected|reason=hash-mismatch|h=" + reconstructed.hex());
            outcome.status = CertifyStatus::Rejected;
            outcome.reject_reason = RejectReason::HashMismatch;
            return outcome;
        }
        if (t.params.max_rounds > 0 && t.round >= t.params.max_rounds) {
            t.status = TaskStatus::Rejected;
            t.reject_reason = RejectReason::HashMismatch;
            append_tx(t, "resolve",
                      "resolve|task=" + std::to_string(t.id) + "|round=" + std::to_string(t.round) +
                          "|status=rejected|reason=hash-mismatch|h=" + reconstructed.hex());
            outcome.status = CertifyStatus::Rejected;
            outcome.reject_reason = RejectReason::HashMismatch;
            return outcome;
        }
        t.status = TaskStatus::Open;
        t.round++;
        t.votes_per_round.push_back(0);
        for (TraceId id : conflicted) {
            t.pending[size_t(id)] = 1;
            outcome.requeued.push_back(id);
        }
        std::sort(outcome.requeued.begin(), outcome.requeued.end());
        outcome.status = CertifyStatus::Conflicted;
        return outcome;
    }

    if (t.params.max_rounds > 0 && t.round >= t.params.max_rounds) {
        t.status = TaskStatus::Rejected;
        t.reject_reason = RejectReason::NoQuorum;
        append_tx(t, "resolve",
                  "resolve|task=" + std::to_string(t.id) + "|round=" + std::to_string(t.round) +
                      "|status=rejected|reason=no-quorum");
        outcome.status = CertifyStatus::Rejected;
        outcome.reject_reason = RejectReason::NoQuorum;
        return outcome;
    }

    // Conflicted traces (and those made ambiguous by check violations) are
    // re-queued for workers who have not voted on them.
    t.status = TaskStatus::Open;
    t.round++;
    t.votes_per_round.push_back(0);
    for (TraceId id : conflicted) {
        t.pending[size_t(id)] = 1;
        outcome.requeued.push_back(id);
    }
    std::sort(outcome.requeued.begin(), outcome.requeued.end());
    outcome.status = CertifyStatus::Conflicted;
    return outcome;
}

void Ledger::reject_exhausted(TaskId task_id) {
    std::lock_guard<std::mutex> lock(mu_);
    Task& t = task_mut(task_id);
    if (t.terminal()) return;
    t.status = TaskStatus::Rejected;
    t.reject_reason = RejectReason::Exhausted;
    append_tx(t, "resolve",
              "resolve|task=" + std::to_string(t.id) + "|round=" + std::to_string(t.round) +
                  "|status=rejected|reason=exhausted");
}

TaskMetrics Ledger::ledger_metrics(TaskId id) const {
    std::lock_guard<std::mutex> lock(mu_);
    const Task& t = task(id);
    TaskMetrics m;
    m.tx_count = t.tx_count;
    m.votes_per_round = t.votes_per_round;
    m.rounds_used = t.round;
    m.verifier_checks = t.verifier_checks;
    return m;
}

std::string Ledger::log_text() const {
    std::ostringstream out;
    for (const LedgerRecord& rec : log_) {
        out << rec.index << '\t' << rec.kind << '\t' << rec.payload_digest.hex() << '\n';
    }
    return out.str();
}

Hash32 Ledger::log_digest() const { return mona::sha256(log_text()); }

void Ledger::persist_log(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write ledger log " + path.string());
    f << log_text();
}

namespace {

json certificate_json(const Certificate& cert) {
    json hashes = json::array();
    for (const Hash32& h : cert.ordered_state_hashes) hashes.push_back(h.hex());
    json evidence = json::array();
    for (const EdgeEvidence& e : cert.votes_evidence) {
        evidence.push_back({{"outputHash", e.output.hex()},
                            {"traceId", e.trace},
                            {"votesFor", e.votes_for},
                            {"votesTotal", e.votes_total}});
    }
    return {{"claimedH", cert.claimed_h.hex()},
            {"orderedStateHashes", std::move(hashes)},
            {"reconstructedH", cert.reconstructed_h.hex()},
            {"roundsUsed", cert.rounds_used},
            {"taskId", cert.task_id},
            {"txCount", cert.ledger_tx_count},
            {"votesEvidence", std::move(evidence)}};
}

Certificate certificate_from_json(const json& doc) {
    Certificate cert;
    cert.task_id = doc.at("taskId").get<TaskId>();
    cert.claimed_h = Hash32::from_hex(doc.at("claimedH").get<std::string>());
    cert.reconstructed_h = Hash32::from_hex(doc.at("reconstructedH").get<std::string>());
    for (const json& h : doc.at("orderedStateHashes")) {
        cert.ordered_state_hashes.push_back(Hash32::from_hex(h.get<std::string>()));
    }
    for (const json& e : doc.at("votesEvidence")) {
        cert.votes_evidence.push_back({e.at("traceId").get<TraceId>(),
                                       Hash32::from_hex(e.at("outputHash").get<std::string>()),
                                       e.at("votesFor").get<int>(),
                                       e.at("votesTotal").get<int>()});
    }
    cert.rounds_used = doc.at("roundsUsed").get<int>();
    cert.ledger_tx_count = doc.at("txCount").get<uint64_t>();
    return cert;
}

}  // namespace

std::string Ledger::save_state() const {
    std::lock_guard<std::mutex> lock(mu_);
    json tasks = json::array();
    for (const auto& [id, t] : tasks_) {
        json traces = json::array();
        for (const RedactedTraceView& tr : t.traces) {
            traces.push_back({{"id", tr.id}, {"inputHash", tr.input_hash.hex()}, {"s", tr.s}});
        }
        json votes = json::array();
        for (const auto& per_trace : t.votes) {
            json vs = json::array();
            for (const Vote& v : per_trace) {
                vs.push_back({{"outputHash", v.output.hex()},
                              {"round", v.round},
                              {"trace", v.trace},
                              {"worker", v.worker}});
            }
            votes.push_back(std::move(vs));
        }
        json received = json::array();
        for (const auto& set : t.received) received.push_back(std::vector<WorkerId>(set.begin(), set.end()));
        json in_flight = json::array();
        for (const auto& w : t.in_flight) in_flight.push_back(w ? json(*w) : json(nullptr));
        json task_doc = {
            {"claimedH", t.claimed_h.hex()},
            {"id", t.id},
            {"inFlight", std::move(in_flight)},
            {"params",
             {{"maxRounds", t.params.max_rounds},
              {"quorumFraction", t.params.quorum_fraction},
              {"rngSeed", t.params.rng_seed},
              {"verifierCount", t.params.verifier_count},
              {"workerCount", t.params.worker_count}}},
            {"pending", std::vector<int>(t.pending.begin(), t.pending.end())},
            {"programRef", t.program_ref.hex()},
            {"received", std::move(received)},
            {"rejectReason", int(t.reject_reason)},
            {"round", t.round},
            {"status", int(t.status)},
            {"stepSize", t.step_size},
            {"submittedIndex", t.submitted_index},
            {"traces", std::move(traces)},
            {"txCount", t.tx_count},
            {"verifierChecks", t.verifier_checks},
            {"votes", std::move(votes)},
            {"votesPerRound", t.votes_per_round},
        };
        if (t.certificate) task_doc["certificate"] = certificate_json(*t.certificate);
        tasks.push_back(std::move(task_doc));
    }
    json log = json::array();
    for (const LedgerRecord& rec : log_) {
        log.push_back({{"index", rec.index}, {"kind", rec.kind}, {"payload", rec.payload_digest.hex()}});
    }
    json doc = {{"log", std::move(log)}, {"nextId", next_id_}, {"tasks", std::move(tasks)}};
    return doc.dump(2) + "\n";
}

void Ledger::load_state(const std::string& json_text) {
    std::lock_guard<std::mutex> lock(mu_);
    json doc = json::parse(json_text);
    tasks_.clear();
    log_.clear();
    next_id_ = doc.at("nextId").get<TaskId>();
    for (const json& rec : doc.at("log")) {
        log_.push_back({rec.at("index").get<uint64_t>(), rec.at("kind").get<std::string>(),
                        Hash32::from_hex(rec.at("payload").get<std::string>())});
    }
    for (const json& task_doc : doc.at("tasks")) {
        Task t;
        t.id = task_doc.at("id").get<TaskId>();
        t.program_ref = Hash32::from_hex(task_doc.at("programRef").get<std::string>());
        t.step_size = task_doc.at("stepSize").get<uint64_t>();
        t.claimed_h = Hash32::from_hex(task_doc.at("claimedH").get<std::string>());
        t.status = TaskStatus(task_doc.at("status").get<int>());
        t.reject_reason = RejectReason(task_doc.at("rejectReason").get<int>());
        t.round = task_doc.at("round").get<int>();
        const json& p = task_doc.at("params");
        t.params.max_rounds = p.at("maxRounds").get<int>();
        t.params.quorum_fraction = p.at("quorumFraction").get<double>();
        t.params.rng_seed = p.at("rngSeed").get<uint64_t>();
        t.params.verifier_count = p.at("verifierCount").get<int>();
        t.params.worker_count = p.at("workerCount").get<int>();
        for (const json& tr : task_doc.at("traces")) {
            t.traces.push_back({tr.at("id").get<TraceId>(),
                                Hash32::from_hex(tr.at("inputHash").get<std::string>()),
                                tr.at("s").get<uint64_t>()});
        }
        for (const json& per_trace : task_doc.at("votes")) {
            std::vector<Vote> vs;
            for (const json& v : per_trace) {
                vs.push_back({v.at("trace").get<TraceId>(), v.at("worker").get<WorkerId>(),
                              Hash32::from_hex(v.at("outputHash").get<std::string>()),
                              v.at("round").get<int>()});
            }
            t.votes.push_back(std::move(vs));
        }
        for (const json& b : task_doc.at("pending")) t.pending.push_back(uint8_t(b.get<int>()));
        for (const json& w : task_doc.at("inFlight")) {
            if (w.is_null()) {
                t.in_flight.emplace_back();
            } else {
                t.in_flight.emplace_back(w.get<WorkerId>());
            }
        }
        for (const json& set : task_doc.at("received")) {
            std::set<WorkerId> workers;
            for (const json& w : set) workers.insert(w.get<WorkerId>());
            t.received.push_back(std::move(workers));
        }
        t.submitted_index = task_doc.at("submittedIndex").get<std::vector<int>>();
        t.votes_per_round = task_doc.at("votesPerRound").get<std::vector<int>>();
        t.verifier_checks = task_doc.at("verifierChecks").get<uint64_t>();
        t.tx_count = task_doc.at("txCount").get<uint64_t>();
        if (task_doc.contains("certificate")) {
            t.certificate = certificate_from_json(task_doc.at("certificate"));
        }
        TaskId id = t.id;
        tasks_.emplace(id, std::move(t));
    }
}

}  // namespace occp
