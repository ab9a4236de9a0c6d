#pragma once

// Semantic search over the graph: cosine top-k seeds, then a breadth-first
// expansion that keeps the per_hop_k unvisited neighbours closest to the query.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kgprover/embedding.hpp"
#include "kgprover/graph_store.hpp"

namespace kgp {

struct ScoredNode {
    NodeId id = 0;
    double score = 0.0;

    bool operator==(const ScoredNode&) const = default;
};

struct ContextEntry {
    NodeId id = 0;
    double score = 0.0;
    std::size_t hop = 0;

    bool operator==(const ContextEntry&) const = default;
};

struct RenderBudget {
    std::size_t per_node = 4000;
    std::size_t total = 24000;
};

struct RetrievalContext {
    std::vector<ContextEntry> entries;  // seeds by rank, then hop 1, hop 2, ...
    std::string rendered;
    std::size_t token_estimate = 0;

    std::vector<NodeId> node_ids() const;
    bool empty() const noexcept { return entries.empty(); }
};

struct RetrievalQuery {
    std::string query_text;
    std::size_t k = 5;
    std::size_t depth = 2;
    std::optional<std::uint64_t> seed;          // set: shuffled top-k seeds
    std::optional<std::size_t> shuffle_keep;    // subset size in shuffled mode
    std::optional<std::set<RelType>> edge_types;  // traversal filter, off by default
};

/// Best `k` nodes by cosine to `query`, descending, ties by ascending id.
/// Throws Error when any node lacks an embedding.
std::vector<ScoredNode> top_k_seed(const GraphStore& store, std::span<const float> query, std::size_t k);

/// Breadth-first expansion over undirected edges from `seeds`. Seeds keep their
/// given order at hop 0. The returned context is not rendered.
RetrievalContext expand(const GraphStore& store, std::span<const float> query,
                        std::span<const NodeId> seeds, std::size_t depth, std::size_t per_hop_k,
                        const std::optional<std::set<RelType>>& edge_types = std::nullopt);

/// Fills `rendered` and `token_estimate` from `entries`.
void render_context(const GraphStore& store, RetrievalContext& context, const RenderBudget& budget = {});

/// Subset size used by shuffled retrieval when none is requested: ceil(k / 2).
std::size_t default_shuffle_keep(std::size_t k);

/// Seeded shuffle of the deterministic top-k, truncated to `keep` ids.
std::vector<NodeId> shuffled_top_k(const GraphStore& store, std::span<const float> query, std::size_t k,
                                   std::uint64_t seed, std::optional<std::size_t> keep = std::nullopt);

/// Full query path: embed, seed, expand, render. Requires a sealed store.
class Retriever {
public:
    Retriever(std::shared_ptr<const GraphStore> store, std::shared_ptr<EmbeddingCache> embedder,
              RenderBudget budget = {});

    RetrievalContext retrieve(const RetrievalQuery& query) const;
    const GraphStore& store() const noexcept { return *store_; }

private:
    std::shared_ptr<const GraphStore> store_;
    std::shared_ptr<EmbeddingCache> embedder_;
    RenderBudget budget_;
};

}  // namespace kgp
