#include "kgprover/retrieval.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <unordered_set>

#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

namespace {

bool ranks_before(const ScoredNode& a, const ScoredNode& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

double score_node(const GraphStore& store, NodeId id, std::span<const float> query) {
    auto v = store.embedding(id);
    if (!v) throw Error("node " + std::to_string(id) + " has no embedding");
    return cosine(query, *v);
}

// Unbiased draw in [0, bound) straight from the engine, so the shuffle does
// not depend on the standard library's distribution implementation.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace

std::vector<NodeId> RetrievalContext::node_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(e.id);
    return ids;
}

std::vector<ScoredNode> top_k_seed(const GraphStore& store, std::span<const float> query, std::size_t k) {
    if (!store.has_all_embeddings()) {
        if (store.nodes().empty()) return {};
        throw Error("top-k search needs an embedding for every node");
    }
    std::vector<ScoredNode> scored;
    scored.reserve(store.nodes().size());
    for (const auto& node : store.nodes()) scored.push_back({node.id, score_node(store, node.id, query)});
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), ranks_before);
    scored.resize(n);
    return scored;
}

RetrievalContext expand(const GraphStore& store, std::span<const float> query,
                        std::span<const NodeId> seeds, std::size_t depth, std::size_t per_hop_k,
                        const std::optional<std::set<RelType>>& edge_types) {
    RetrievalContext ctx;
    std::unordered_set<NodeId> visited;
    std::vector<NodeId> frontier;
    for (NodeId id : seeds) {
        if (!visited.insert(id).second) continue;
        ctx.entries.push_back({id, score_node(store, id, query), 0});
        frontier.push_back(id);
    }
    for (std::size_t hop = 1; hop <= depth && !frontier.empty(); ++hop) {
        std::vector<ScoredNode> candidates;
        std::unordered_set<NodeId> queued;
        for (NodeId id : frontier) {
            for (const auto& nb : store.neighbors(id, Direction::both, edge_types)) {
                NodeId cand = nb.node->id;
                if (visited.contains(cand) || !queued.insert(cand).second) continue;
                candidates.push_back({cand, score_node(store, cand, query)});
            }
        }
        std::sort(candidates.begin(), candidates.end(), ranks_before);
        if (candidates.size() > per_hop_k) candidates.resize(per_hop_k);
        frontier.clear();
        for (const auto& c : candidates) {
            visited.insert(c.id);
            ctx.entries.push_back({c.id, c.score, hop});
            frontier.push_back(c.id);
        }
    }
    return ctx;
}

void render_context(const GraphStore& store, RetrievalContext& context, const RenderBudget& budget) {
    std::string out;
    for (const auto& entry : context.entries) {
        const auto& node = store.node(entry.id);
        std::string block = "## " + node.title + "\n" + node.content;
        if (!out.empty()) out += "\n\n";
        out += text::utf8_truncate(block, budget.per_node);
        if (out.size() >= budget.total) break;
    }
    context.rendered = std::string(text::trim_right(text::utf8_truncate(out, budget.total)));
    context.token_estimate = (context.rendered.size() + 3) / 4;
}

std::size_t default_shuffle_keep(std::size_t k) { return (k + 1) / 2; }

std::vector<NodeId> shuffled_top_k(const GraphStore& store, std::span<const float> query, std::size_t k,
                                   std::uint64_t seed, std::optional<std::size_t> keep) {
    auto top = top_k_seed(store, query, k);
    std::vector<NodeId> ids;
    ids.reserve(top.size());
    for (const auto& s : top) ids.push_back(s.id);
    std::mt19937_64 rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[draw_below(rng, i)]);
    ids.resize(std::min(ids.size(), keep.value_or(default_shuffle_keep(k))));
    return ids;
}

Retriever::Retriever(std::shared_ptr<const GraphStore> store, std::shared_ptr<EmbeddingCache> embedder,
                     RenderBudget budget)
    : store_(std::move(store)), embedder_(std::move(embedder)), budget_(budget) {
    if (!store_ || !store_->sealed()) throw Error("retriever needs a sealed graph store");
}

RetrievalContext Retriever::retrieve(const RetrievalQuery& query) const {
    if (query.k == 0) throw Error("retrieval k must be at least 1");
    auto qv = embedder_->embed(query.query_text);
    std::vector<NodeId> seeds;
    if (query.seed) {
        seeds = shuffled_top_k(*store_, qv, query.k, *query.seed, query.shuffle_keep);
    } else {
        for (const auto& s : top_k_seed(*store_, qv, query.k)) seeds.push_back(s.id);
    }
    auto ctx = expand(*store_, qv, seeds, query.depth, query.k, query.edge_types);
    render_context(*store_, ctx, budget_);
    return ctx;
}

}  // namespace kgp
