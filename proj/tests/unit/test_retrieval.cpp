#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "kgprover/error.hpp"
#include "kgprover/retrieval.hpp"
#include "retrieval_oracle.hpp"
#include "test_support.hpp"

using namespace kgp;
using namespace kgp::testing;

TEST_SUITE("retrieval") {

TEST_CASE("top_k_seed matches brute force on random stores") {
    std::mt19937_64 rng(31337);
    for (int round = 0; round < 120; ++round) {
        StoreShape shape;
        shape.nodes = 1 + rng() % 60;
        shape.edges = rng() % 120;
        shape.dim = 2 + rng() % 12;
        auto g = random_store(rng, shape);
        auto q = random_vector(rng, shape.dim);
        const std::size_t k = 1 + rng() % 12;
        auto got = top_k_seed(g, q, k);
        auto want = oracle_top_k(g, q, k);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == want[i]);
            if (i) CHECK(got[i - 1].score >= got[i].score);
        }
    }
}

TEST_CASE("expand matches a reference breadth-first walk") {
    std::mt19937_64 rng(4242);
    for (int round = 0; round < 120; ++round) {
        StoreShape shape;
        shape.nodes = 2 + rng() % 50;
        shape.edges = rng() % 100;
        auto g = random_store(rng, shape);
        auto q = random_vector(rng, shape.dim);
        const std::size_t k = 1 + rng() % 6;
        const std::size_t depth = rng() % 4;
        std::optional<std::set<RelType>> filter;
        if (rng() % 3 == 0) filter = std::set<RelType>{RelType::LINK, RelType::USES_DEFINITION};
        auto seeds = oracle_top_k(g, q, k);
        auto got = expand(g, q, seeds, depth, k, filter);
        auto want = oracle_expand(g, q, seeds, depth, k, filter);
        REQUIRE(got.entries.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got.entries[i].id == want[i].first);
            CHECK(got.entries[i].hop == want[i].second);
        }
    }
}

TEST_CASE("expansion invariants") {
    std::mt19937_64 rng(77);
    for (int round = 0; round < 60; ++round) {
        auto g = random_store(rng, {});
        auto q = random_vector(rng, 8);
        auto seeds = oracle_top_k(g, q, 3);
        auto ctx = expand(g, q, seeds, 3, 3);
        std::set<NodeId> ids;
        std::size_t last_hop = 0;
        for (const auto& e : ctx.entries) {
            CHECK(ids.insert(e.id).second);  // no duplicates
            CHECK(e.hop >= last_hop);        // hops non-decreasing
            last_hop = e.hop;
        }
        std::map<std::size_t, std::size_t> per_hop;
        for (const auto& e : ctx.entries) ++per_hop[e.hop];
        for (const auto& [hop, count] : per_hop) CHECK(count <= 3);
        // depth 0 returns exactly the seeds
        auto flat = expand(g, q, seeds, 0, 3);
        CHECK(flat.node_ids() == seeds);
    }
}

TEST_CASE("shuffled seeds are a subset of the deterministic top-k") {
    std::mt19937_64 rng(5150);
    for (int round = 0; round < 200; ++round) {
        StoreShape shape;
        shape.nodes = 1 + rng() % 40;
        auto g = random_store(rng, shape);
        auto q = random_vector(rng, shape.dim);
        const std::size_t k = 1 + rng() % 10;
        const std::uint64_t seed = rng();
        auto top = oracle_top_k(g, q, k);
        auto shuffled = shuffled_top_k(g, q, k, seed);
        CHECK(shuffled.size() == std::min(top.size(), default_shuffle_keep(k)));
        std::set<NodeId> pool(top.begin(), top.end());
        std::set<NodeId> distinct(shuffled.begin(), shuffled.end());
        CHECK(distinct.size() == shuffled.size());
        for (auto id : shuffled) CHECK(pool.contains(id));
        CHECK(shuffled_top_k(g, q, k, seed) == shuffled);  // reproducible
        auto all = shuffled_top_k(g, q, k, seed, k);
        std::sort(all.begin(), all.end());
        std::vector<NodeId> sorted_top(top.begin(), top.end());
        std::sort(sorted_top.begin(), sorted_top.end());
        CHECK(all == sorted_top);  // a permutation when nothing is dropped
    }
}

TEST_CASE("shuffle order is frozen for a fixed seed") {
    GraphStore g;
    for (NodeId i = 0; i < 6; ++i) {
        g.add_node({i, NodeType::theorem, "N" + std::to_string(i), "N", "c"});
        g.set_embedding(i, {1.0f, static_cast<float>(i) * 0.1f});
    }
    g.seal();
    std::vector<float> q = {1.0f, 0.0f};
    CHECK(oracle_top_k(g, q, 6) == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
    CHECK(shuffled_top_k(g, q, 6, 1, 6) == std::vector<NodeId>{1, 3, 0, 4, 5, 2});
    CHECK(default_shuffle_keep(5) == 3);
    CHECK(default_shuffle_keep(1) == 1);
}

TEST_CASE("ties break by ascending id") {
    GraphStore g;
    for (NodeId i = 0; i < 5; ++i) {
        g.add_node({i, NodeType::theorem, "N", "N", "c"});
        g.set_embedding(i, {1.0f, 1.0f});
    }
    g.seal();
    std::vector<float> q = {1.0f, 0.0f};
    auto top = top_k_seed(g, q, 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0].id == 0);
    CHECK(top[1].id == 1);
    CHECK(top[2].id == 2);
}

TEST_CASE("render_context respects budgets") {
    GraphStore g;
    g.add_node({0, NodeType::definition, "Definition:A", "A", std::string(100, 'a')});
    g.add_node({1, NodeType::definition, "Definition:B", "B", "short"});
    g.seal();
    RetrievalContext ctx;
    ctx.entries = {{0, 1.0, 0}, {1, 0.5, 1}};
    render_context(g, ctx, {50, 1000});
    CHECK(ctx.rendered.rfind("## Definition:A\n", 0) == 0);
    CHECK(ctx.rendered.find("## Definition:B\nshort") != std::string::npos);
    CHECK(ctx.rendered.size() <= 50 + 2 + 21);
    CHECK(ctx.token_estimate == (ctx.rendered.size() + 3) / 4);
    render_context(g, ctx, {4000, 30});
    CHECK(ctx.rendered.size() <= 30);
}

TEST_CASE("retriever end to end over the fixture graph") {
    auto store = std::make_shared<GraphStore>(GraphStore::load(fixture("graph/nodes.jsonl"), fixture("graph/edges.csv")));
    auto embedder = std::make_shared<EmbeddingCache>(
        std::make_shared<MockEmbeddingProvider>(fixture("mock/graph/embeddings.jsonl")), 8);
    for (const auto& n : store->nodes()) store->set_embedding(n.id, embedder->embed(node_embedding_text(n)));
    CHECK_THROWS_AS(Retriever(store, embedder), Error);  // unsealed
    store->seal();
    Retriever r(store, embedder);
    RetrievalQuery q;
    q.query_text = "The identity element of a group is unique.";
    q.k = 3;
    q.depth = 1;
    auto ctx = r.retrieve(q);
    REQUIRE(ctx.entries.size() >= 3);
    CHECK(ctx.entries[0].id == 5);
    CHECK(ctx.entries[0].hop == 0);
    CHECK_FALSE(ctx.rendered.empty());
    q.depth = 0;
    CHECK(r.retrieve(q).entries.size() == 3);
    q.k = 0;
    CHECK_THROWS_AS(r.retrieve(q), Error);
}

TEST_CASE("missing embeddings are an error") {
    GraphStore g;
    g.add_node({0, NodeType::theorem, "A", "A", ""});
    g.add_node({1, NodeType::theorem, "B", "B", ""});
    g.set_embedding(0, {1.0f});
    g.seal();
    std::vector<float> q = {1.0f};
    CHECK_THROWS_AS(top_k_seed(g, q, 1), Error);
}

}
