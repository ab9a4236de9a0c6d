#pragma once

// Chat-model abstraction: prompt templates, response parsers and backends
// (live HTTP and a scripted mock).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgprover/http_transport.hpp"
#include "kgprover/problem.hpp"
#include "kgprover/retry.hpp"

namespace kgp {

struct RetrievalContext;

enum class TemplateId { informal, formalize, judge };

std::string_view to_string(TemplateId id);
std::optional<TemplateId> parse_template_id(std::string_view s);

struct SamplingParams {
    double temperature = 0.0;  // 0 selects greedy decoding
    double top_p = 1.0;
    int max_tokens = 2048;
    std::optional<std::uint64_t> seed;
};

/// Temperatures cycled across best-of-N candidates.
inline constexpr double kTemperatureLadder[] = {0.2, 0.4, 0.6, 0.8, 1.0};

struct PromptBundle {
    std::string role_header;  // sent as the system message
    std::string body;         // sent as the user message
    TemplateId template_id = TemplateId::informal;

    /// The prompt as one document, exactly as the template lays it out.
    std::string text() const;
};

struct TokenUsage {
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
};

struct ModelResponse {
    std::string text;
    TokenUsage usage;
    std::string backend_id;
    int retries = 0;
};

/// `context` is the rendered retrieval text; empty renders "Context: (none)".
PromptBundle render_informal_prompt(const Problem& problem, std::string_view context);
PromptBundle render_informal_prompt(const Problem& problem, const RetrievalContext& context);

PromptBundle render_formal_prompt(std::string_view header, std::string_view informal_proof,
                                  std::string_view informal_prefix, std::string_view formal_statement,
                                  const std::optional<std::string>& goal,
                                  std::string_view error_feedback = {});

PromptBundle render_judge_prompt(const Problem& problem, std::string_view candidate_proof);

/// Wraps code in the formalizer's required response format.
std::string wrap_lean_response(std::string_view code);

/// First ```lean4 / ```lean block (falling back to the first untagged fence),
/// trailing whitespace trimmed. Throws ExtractionError when none is usable.
std::string extract_lean_block(std::string_view response_text);

/// Text after the last "Informal Proof:" marker, or the whole response.
std::string extract_informal_proof(std::string_view response_text);

struct JudgeVerdict {
    int score = 0;  // always within [0, 10]
    std::string justification;
    std::vector<std::string> warnings;
};

/// Parses the last "SCORE: <n>" line. Throws ScoreParseError when absent.
JudgeVerdict parse_judge_score(std::string_view response_text);

/// Routes mock script lookups; live backends ignore it.
struct RequestTag {
    std::string problem_id;
};

class ChatBackend {
public:
    explicit ChatBackend(RetryPolicy retry = {}) : retry_(std::move(retry)) {}
    virtual ~ChatBackend() = default;

    /// Retries transient transport failures per the backend's policy.
    ModelResponse complete(const PromptBundle& prompt, const SamplingParams& params, const RequestTag& tag);

    virtual std::string id() const = 0;

protected:
    virtual ModelResponse send(const PromptBundle& prompt, const SamplingParams& params,
                               const RequestTag& tag) = 0;

private:
    RetryPolicy retry_;
};

/// Replays responses from JSONL rows {problem_id, template_id, turn, response_text};
/// each (problem, template) pair has its own 1-based turn cursor.
class MockChatBackend : public ChatBackend {
public:
    explicit MockChatBackend(const std::filesystem::path& script);
    MockChatBackend() = default;

    void add(const std::string& problem_id, TemplateId id, int turn, std::string text);
    std::string id() const override { return "mock"; }

    /// Calls served so far for a (problem, template) pair.
    int calls(const std::string& problem_id, TemplateId id) const;
    std::size_t total_calls() const;

protected:
    ModelResponse send(const PromptBundle& prompt, const SamplingParams& params,
                       const RequestTag& tag) override;

private:
    using Key = std::pair<std::string, TemplateId>;
    std::map<Key, std::map<int, std::string>> script_;
    std::map<Key, int> cursor_;
    mutable std::mutex mutex_;
};

struct HttpChatConfig {
    std::string model;
    std::string api_key;
    std::size_t max_in_flight = 4;
};

/// OpenAI-style chat endpoint: POST /chat/completions.
class HttpChatBackend : public ChatBackend {
public:
    HttpChatBackend(HttpChatConfig config, std::unique_ptr<HttpTransport> transport, RetryPolicy retry = {});
    std::string id() const override { return "http:" + config_.model; }

protected:
    ModelResponse send(const PromptBundle& prompt, const SamplingParams& params,
                       const RequestTag& tag) override;

private:
    HttpChatConfig config_;
    std::unique_ptr<HttpTransport> transport_;
    std::counting_semaphore<1024> in_flight_;
};

}  // namespace kgp
