#pragma once

// The prove loop (retrieve, informal proof, formalize, verify, refine) and the
// judged search variants built on the same services.

#include <json.hpp>

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgprover/graph_store.hpp"
#include "kgprover/model_gateway.hpp"
#include "kgprover/problem.hpp"
#include "kgprover/retrieval.hpp"
#include "kgprover/verifier.hpp"

namespace kgp {

using ojson = nlohmann::ordered_json;

enum class Method { base, rag, graph };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

struct RunConfig {
    Method method = Method::graph;
    std::size_t attempts = 3;   // r
    std::size_t max_depth = 2;  // d
    std::size_t top_k = 5;      // k
    SamplingParams sampling;
    std::optional<std::uint64_t> seed;
    std::size_t beam_width = 2;
    std::size_t search_depth = 2;
    std::size_t n_candidates = 3;
    std::chrono::milliseconds verify_timeout = kDefaultVerifyTimeout;
    /// Retrieval contexts with fewer nodes count as missing knowledge.
    std::size_t context_floor = 1;
};

/// Throws ConfigError on zero attempts, top_k, beam_width, search_depth or n_candidates.
void validate(const RunConfig& config);

/// Depth ceiling after method rules: 0 for base and rag, d for graph.
std::size_t effective_max_depth(const RunConfig& config);

/// Context depth for a 1-based attempt: min(attempt - 1, effective_max_depth).
std::size_t depth_for_attempt(const RunConfig& config, std::size_t attempt);

struct AttemptTrace {
    std::size_t attempt_index = 1;
    std::size_t context_depth_used = 0;
    std::vector<NodeId> context_node_ids;
    std::string informal_proof;
    std::string formal_code;  // the submitted unit, as verified
    VerificationResult verification;
    std::optional<std::string> extraction_error;
};

enum class OutcomeStatus { verified, failed, error };
enum class FailureClass { formalization_gap, missing_knowledge, model_error, other };

std::string_view to_string(OutcomeStatus s);
std::string_view to_string(FailureClass c);
std::optional<OutcomeStatus> parse_outcome_status(std::string_view s);
std::optional<FailureClass> parse_failure_class(std::string_view s);

struct ProofOutcome {
    std::string problem_name;
    Method method = Method::graph;
    OutcomeStatus status = OutcomeStatus::failed;
    std::vector<AttemptTrace> attempts;
    std::optional<std::size_t> winning_attempt;
    std::optional<FailureClass> failure_class;
    std::optional<std::string> error_message;
};

/// Everything the loops talk to. The same backend may fill several roles.
struct Services {
    const Retriever* retriever = nullptr;  // required for rag and graph
    ChatBackend* prover = nullptr;
    ChatBackend* formalizer = nullptr;
    ChatBackend* judge = nullptr;  // search variants only
    Verifier* verifier = nullptr;
};

ProofOutcome prove(const Problem& problem, const RunConfig& config, const Services& services);

/// Rule order: extraction failure on the last attempt, then a retrieval
/// context below `context_floor` nodes, then informal proof with checker
/// errors, then other. nullopt unless status is failed.
std::optional<FailureClass> classify_failure(const ProofOutcome& outcome, std::size_t context_floor = 1);

struct Candidate {
    std::size_t id = 0;  // 1-based, in generation order
    std::optional<std::size_t> parent;
    std::string informal_proof;
    std::optional<std::string> formal_code;
    int judge_score = 0;
    std::string justification;
    bool judged = false;
    std::optional<VerificationResult> verification;
    std::vector<std::string> warnings;

    bool verified() const { return verification && verification->status == VerifyStatus::verified; }
};

struct BestOfNResult {
    Candidate best;
    std::vector<Candidate> ranked;  // score descending, ties by id
};

BestOfNResult best_of_n(const Problem& problem, const RunConfig& config, const Services& services);

struct SearchIteration {
    std::size_t iteration = 0;
    std::vector<Candidate> pool;         // candidates considered this iteration
    std::vector<std::size_t> retained;   // ids kept, in rank order
};

struct SearchResult {
    Candidate best;
    std::vector<SearchIteration> iterations;
    bool early_exit = false;
};

SearchResult tree_search(const Problem& problem, const RunConfig& config, const Services& services);

// JSON forms used by traces and reports.
ojson to_json(const RunConfig& config);
RunConfig run_config_from_json(const ojson& j);
ojson to_json(const VerificationResult& v);
VerificationResult verification_from_json(const ojson& j);
ojson to_json(const ProofOutcome& outcome);
ProofOutcome outcome_from_json(const ojson& j);
ojson to_json(const Candidate& c);
ojson to_json(const BestOfNResult& r);
ojson to_json(const SearchResult& r);

}  // namespace kgp
