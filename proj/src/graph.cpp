#include "occp/graph.hpp"

#include <algorithm>
#include <set>

namespace occp {

std::vector<TraceId> GraphCheckResult::implicated_sources() const {
    std::set<TraceId> out;
    for (const CheckViolation& v : violations) out.insert(v.implicated.begin(), v.implicated.end());
    return std::vector<TraceId>(out.begin(), out.end());
}

GraphCheckResult check_graph(size_t trace_count, const std::vector<QuorumEdge>& edges) {
    GraphCheckResult result;
    size_t n = trace_count;

    // Check 1: at most one outgoing connection per vertex.
    {
        std::vector<std::vector<size_t>> out_edges(n);
        for (size_t e = 0; e < edges.size(); ++e) {
            out_edges[size_t(edges[e].src)].push_back(e);
        }
        for (size_t v = 0; v < n; ++v) {
            if (out_edges[v].size() > 1) {
                CheckViolation violation;
                violation.check = 1;
                violation.vertices = {TraceId(v)};
                violation.implicated = {TraceId(v)};
                result.violations.push_back(std::move(violation));
            }
        }
    }

    // Check 2: at most one incoming connection per vertex. The head is never
    // a target, so it is exempt by construction.
    {
        std::vector<std::vector<TraceId>> in_sources(n);
        for (const QuorumEdge& e : edges) {
            if (e.dst) in_sources[size_t(*e.dst)].push_back(e.src);
        }
        for (size_t v = 0; v < n; ++v) {
            if (in_sources[v].size() > 1) {
                CheckViolation violation;
                violation.check = 2;
                violation.vertices = {TraceId(v)};
                violation.implicated = in_sources[v];
                result.violations.push_back(std::move(violation));
            }
        }
    }

    // Check 3: no directed cycle. Terminal edges cannot be part of one.
    {
        std::vector<std::vector<TraceId>> adj(n);
        for (const QuorumEdge& e : edges) {
            if (e.dst) adj[size_t(e.src)].push_back(*e.dst);
        }
        std::vector<uint8_t> color(n, 0);  // 0 fresh, 1 on stack, 2 done
        std::vector<TraceId> on_cycle;
        std::vector<TraceId> stack;
        auto dfs = [&](auto&& self, TraceId v) -> void {
            color[size_t(v)] = 1;
            stack.push_back(v);
            for (TraceId w : adj[size_t(v)]) {
                if (color[size_t(w)] == 0) {
                    self(self, w);
                } else if (color[size_t(w)] == 1) {
                    auto it = std::find(stack.begin(), stack.end(), w);
                    on_cycle.insert(on_cycle.end(), it, stack.end());
                }
            }
            stack.pop_back();
            color[size_t(v)] = 2;
        };
        for (size_t v = 0; v < n; ++v) {
            if (color[v] == 0) dfs(dfs, TraceId(v));
        }
        if (!on_cycle.empty()) {
            std::sort(on_cycle.begin(), on_cycle.end());
            on_cycle.erase(std::unique(on_cycle.begin(), on_cycle.end()), on_cycle.end());
            CheckViolation violation;
            violation.check = 3;
            violation.vertices = on_cycle;
            violation.implicated = on_cycle;
            result.violations.push_back(std::move(violation));
        }
    }

    result.ok = result.violations.empty();
    return result;
}

Reconstruction reconstruct_sequence(size_t trace_count, const std::vector<QuorumEdge>& edges) {
    Reconstruction rec;
    size_t n = trace_count;

    std::vector<TraceId> terminal_sources;
    std::vector<int> in_degree(n, 0);
    std::vector<std::optional<size_t>> out_edge(n);
    for (size_t e = 0; e < edges.size(); ++e) {
        const QuorumEdge& edge = edges[e];
        if (out_edge[size_t(edge.src)]) {
            rec.failure = "MultipleOutgoing";
            rec.implicated = {edge.src};
            return rec;
        }
        out_edge[size_t(edge.src)] = e;
        if (edge.dst) {
            in_degree[size_t(*edge.dst)]++;
        } else {
            terminal_sources.push_back(edge.src);
        }
    }
    if (edges.size() != n) {
        rec.failure = "MissingEdges";
        for (size_t v = 0; v < n; ++v) {
            if (!out_edge[v]) rec.implicated.push_back(TraceId(v));
        }
        return rec;
    }
    if (terminal_sources.size() > 1) {
        rec.failure = "MultipleTerminals";
        rec.implicated = terminal_sources;
        return rec;
    }

    std::vector<TraceId> heads;
    for (size_t v = 0; v < n; ++v) {
        if (in_degree[v] == 0) heads.push_back(TraceId(v));
    }
    if (heads.empty()) {
        rec.failure = "NoHead";
        for (size_t v = 0; v < n; ++v) rec.implicated.push_back(TraceId(v));
        return rec;
    }
    if (heads.size() > 1) {
        rec.failure = "MultipleHeads";
        rec.implicated = heads;
        return rec;
    }

    std::vector<uint8_t> visited(n, 0);
    TraceId cur = heads[0];
    for (;;) {
        if (visited[size_t(cur)]) {
            rec.failure = "Cycle";
            rec.implicated = {cur};
            return rec;
        }
        visited[size_t(cur)] = 1;
        rec.order.push_back(cur);
        const QuorumEdge& e = edges[*out_edge[size_t(cur)]];
        if (!e.dst) {
            rec.terminal = e.out;
            break;
        }
        cur = *e.dst;
    }
    if (rec.order.size() != n) {
        rec.failure = "Disconnected";
        for (size_t v = 0; v < n; ++v) {
            if (!visited[v]) rec.implicated.push_back(TraceId(v));
        }
        rec.order.clear();
        return rec;
    }
    rec.ok = true;
    return rec;
}

bool is_permutation_chain(size_t trace_count, const std::vector<QuorumEdge>& edges) {
    size_t n = trace_count;
    if (edges.size() != n) return false;
    std::vector<std::optional<TraceId>> next(n);
    std::vector<uint8_t> has_edge(n, 0);
    size_t terminals = 0;
    for (const QuorumEdge& e : edges) {
        if (has_edge[size_t(e.src)]) return false;
        has_edge[size_t(e.src)] = 1;
        if (e.dst) {
            next[size_t(e.src)] = *e.dst;
        } else {
            terminals++;
        }
    }
    if (terminals != 1) return false;
    // Try every starting vertex: the chain must visit all n exactly once.
    for (size_t start = 0; start < n; ++start) {
        std::vector<uint8_t> seen(n, 0);
        TraceId cur = TraceId(start);
        size_t count = 0;
        while (true) {
            if (seen[size_t(cur)]) break;
            seen[size_t(cur)] = 1;
            count++;
            if (!next[size_t(cur)]) {
                if (count == n) return true;
                break;
            }
            cur = *next[size_t(cur)];
        }
    }
    return false;
}

}  // namespace occp
