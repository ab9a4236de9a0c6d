#pragma once

// Reference implementations for retrieval: a full sort for top-k and a plain
// breadth-first walk over an adjacency map built straight from the edge list.
// Scores are computed in long double, independent of the library's cosine.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "kgprover/graph_store.hpp"

namespace kgp::testing {

inline long double oracle_score(const GraphStore& g, NodeId id, std::span<const float> q) {
    auto v = *g.embedding(id);
    long double dot = 0, nq = 0, nv = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        dot += static_cast<long double>(q[i]) * v[i];
        nq += static_cast<long double>(q[i]) * q[i];
        nv += static_cast<long double>(v[i]) * v[i];
    }
    return dot / (std::sqrt(nq) * std::sqrt(nv));
}

inline std::vector<NodeId> oracle_rank(const GraphStore& g, std::span<const float> q, std::vector<NodeId> ids) {
    std::vector<std::pair<long double, NodeId>> scored;
    for (NodeId id : ids) scored.push_back({oracle_score(g, id, q), id});
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<NodeId> out;
    for (const auto& s : scored) out.push_back(s.second);
    return out;
}

inline std::vector<NodeId> oracle_top_k(const GraphStore& g, std::span<const float> q, std::size_t k) {
    std::vector<NodeId> all;
    for (const auto& n : g.nodes()) all.push_back(n.id);
    auto ranked = oracle_rank(g, q, all);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

/// (id, hop) in visit order.
inline std::vector<std::pair<NodeId, std::size_t>> oracle_expand(
    const GraphStore& g, std::span<const float> q, const std::vector<NodeId>& seeds, std::size_t depth,
    std::size_t per_hop_k, const std::optional<std::set<RelType>>& types = std::nullopt) {
    std::map<NodeId, std::set<NodeId>> adj;
    for (const auto& e : g.edges()) {
        if (types && !types->contains(e.type)) continue;
        adj[e.from_id].insert(e.to_id);
        adj[e.to_id].insert(e.from_id);
    }
    std::vector<std::pair<NodeId, std::size_t>> out;
    std::set<NodeId> seen;
    std::vector<NodeId> frontier;
    for (NodeId s : seeds)
        if (seen.insert(s).second) {
            out.push_back({s, 0});
            frontier.push_back(s);
        }
    for (std::size_t hop = 1; hop <= depth && !frontier.empty(); ++hop) {
        std::set<NodeId> next;
        for (NodeId f : frontier)
            for (NodeId n : adj[f])
                if (!seen.contains(n)) next.insert(n);
        auto ranked = oracle_rank(g, q, {next.begin(), next.end()});
        if (ranked.size() > per_hop_k) ranked.resize(per_hop_k);
        frontier = ranked;
        for (NodeId n : ranked) {
            seen.insert(n);
            out.push_back({n, hop});
        }
    }
    return out;
}

}  // namespace kgp::testing
