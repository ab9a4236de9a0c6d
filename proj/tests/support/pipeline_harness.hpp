#pragma once

// Scripted services for prove / best-of-n / tree-search tests: a chain graph,
// hash-derived embeddings, a recording mock chat backend and a mock verifier.

#include <memory>
#include <string>
#include <vector>

#include "kgprover/pipeline.hpp"
#include "kgprover/text_util.hpp"

namespace kgp::testing {

/// Deterministic vectors from the bytes of sha256(text).
class HashEmbeddingProvider : public EmbeddingProvider {
public:
    std::vector<Vector> embed(std::span<const std::string> texts) override {
        std::vector<Vector> out;
        for (const auto& t : texts) {
            auto hex = text::sha256_hex(t);
            Vector v;
            for (std::size_t i = 0; i < 6; ++i)
                v.push_back(static_cast<float>(std::stoi(hex.substr(2 * i, 2), nullptr, 16)) - 127.5f);
            out.push_back(std::move(v));
        }
        return out;
    }
};

class RecordingChat : public MockChatBackend {
public:
    struct Call {
        TemplateId id;
        std::string text;
        SamplingParams params;
    };
    std::vector<Call> log;

    std::vector<Call> of(TemplateId id) const {
        std::vector<Call> out;
        for (const auto& c : log)
            if (c.id == id) out.push_back(c);
        return out;
    }

protected:
    ModelResponse send(const PromptBundle& prompt, const SamplingParams& params, const RequestTag& tag) override {
        log.push_back({prompt.template_id, prompt.text(), params});
        return MockChatBackend::send(prompt, params, tag);
    }
};

inline std::string informal_reply(const std::string& proof) { return "Thinking.\n\nInformal Proof:\n" + proof; }
inline std::string lean_reply(const std::string& code) { return "# Start\n```lean4\n" + code + "\n```\n# End"; }
inline std::string judge_reply(int score) { return "Reasonable argument.\nSCORE: " + std::to_string(score); }

inline Problem harness_problem(const std::string& name = "demo") {
    Problem p;
    p.name = name;
    p.informal_statement = "Show that the identity of a group is unique.";
    p.header = "import Mathlib\n";
    p.informal_prefix = "/-- Identity is unique. -/\n";
    p.formal_statement = "theorem demo (G : Type*) [Group G] (e : G) (h : ∀ a, e * a = a) : e = 1 := by";
    return p;
}

struct Harness {
    std::shared_ptr<GraphStore> store;
    std::unique_ptr<Retriever> retriever;
    RecordingChat chat;
    MockVerifier verifier;

    explicit Harness(std::size_t chain = 8) {
        store = std::make_shared<GraphStore>();
        auto embedder = std::make_shared<EmbeddingCache>(std::make_shared<HashEmbeddingProvider>(), 6);
        for (NodeId i = 0; i < chain; ++i) {
            Node n{i, NodeType::definition, "Definition:Thing " + std::to_string(i), "Thing", "About thing."};
            store->add_node(n);
            store->set_embedding(i, embedder->embed(n.title));
            if (i) store->add_edge({i - 1, i, RelType::RELATED_DEFINITION});
        }
        store->seal();
        retriever = std::make_unique<Retriever>(store, embedder);
    }

    Services services() {
        Services s;
        s.retriever = retriever.get();
        s.prover = &chat;
        s.formalizer = &chat;
        s.judge = &chat;
        s.verifier = &verifier;
        return s;
    }

    /// One informal + formalize turn per attempt and one verifier row per entry.
    void script_attempts(const std::string& problem, const std::vector<VerifyStatus>& statuses) {
        int turn = 1;
        for (auto st : statuses) {
            chat.add(problem, TemplateId::informal, turn, informal_reply("proof attempt " + std::to_string(turn)));
            chat.add(problem, TemplateId::formalize, turn, lean_reply("  simp [attempt" + std::to_string(turn) + "]"));
            verifier.add(problem, turn, st,
                         st == VerifyStatus::failed ? "Main.lean:3:2: error: unsolved goals\n⊢ e = 1\n" : "");
            ++turn;
        }
    }
};

}  // namespace kgp::testing
