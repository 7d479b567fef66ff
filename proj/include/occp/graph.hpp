#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mona/hash.hpp"

namespace occp {

using TraceId = int32_t;

// A quorum-resolved directed edge: re-executing trace `src` yields the state
// hash `out`, which either names another trace's input (`dst`) or, when it
// matches no input, the candidate terminal output.
struct QuorumEdge {
    TraceId src = -1;
    mona::Hash32 out;
    std::optional<TraceId> dst;
};

struct CheckViolation {
    int check = 0;                    // 1 = out-degree, 2 = in-degree, 3 = cycle
    std::vector<TraceId> vertices;    // where the clash was observed
    std::vector<TraceId> implicated;  // edge sources to re-delegate
};

struct GraphCheckResult {
    bool ok = true;
    std::vector<CheckViolation> violations;

    std::vector<TraceId> implicated_sources() const;
};

// Lemma-1 safeguards over a set of quorum edges: out-degree <= 1 per vertex,
// in-degree <= 1 per vertex, no directed cycle. Violations implicate the
// sources of every clashing edge.
GraphCheckResult check_graph(size_t trace_count, const std::vector<QuorumEdge>& edges);

struct Reconstruction {
    bool ok = false;
    std::vector<TraceId> order;        // the trace sequence, head first
    mona::Hash32 terminal;             // quorum output of the last trace
    std::string failure;               // NoHead / MultipleHeads / MultipleTerminals / ...
    std::vector<TraceId> implicated;   // traces to re-delegate when not ok
};

// Walks the unique head-to-terminal chain. Succeeds iff every trace is
// visited exactly once and the walk ends at the unique terminal, which
// together with the checks realizes |Traces| = |Edges|.
Reconstruction reconstruct_sequence(size_t trace_count, const std::vector<QuorumEdge>& edges);

// Independent oracle used by tests: true iff the edge set is exactly a
// permutation chain v_p0 -> v_p1 -> ... -> v_p(n-1) -> terminal.
bool is_permutation_chain(size_t trace_count, const std::vector<QuorumEdge>& edges);

}  // namespace occp
