#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <future>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgprover/corpus.hpp"
#include "kgprover/http_transport.hpp"
#include "kgprover/retry.hpp"

namespace kgp {

using Vector = std::vector<float>;

/// Cosine similarity accumulated in double precision.
/// Throws DimensionError on length mismatch and DomainError on a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// One vector per input text, same order.
    virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
};

/// Replays vectors from a JSONL table of {"text_hash", "vector"} rows, keyed
/// by sha256 of the text.
class MockEmbeddingProvider : public EmbeddingProvider {
public:
    explicit MockEmbeddingProvider(const std::filesystem::path& table);
    MockEmbeddingProvider(std::unordered_map<std::string, Vector> table) : table_(std::move(table)) {}
    std::vector<Vector> embed(std::span<const std::string> texts) override;

private:
    std::unordered_map<std::string, Vector> table_;
};

struct HttpEmbeddingConfig {
    std::string model = "text-embedding-3-large";
    std::string api_key;
    std::size_t batch_size = 64;
};

/// OpenAI-style embeddings endpoint: POST /embeddings {model, input:[...]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(HttpEmbeddingConfig config, std::unique_ptr<HttpTransport> transport)
        : config_(std::move(config)), transport_(std::move(transport)) {}
    std::vector<Vector> embed(std::span<const std::string> texts) override;

private:
    HttpEmbeddingConfig config_;
    std::unique_ptr<HttpTransport> transport_;
};

/// Content-addressed cache in front of a provider. Concurrent misses on the
/// same text share one provider call.
class EmbeddingCache {
public:
    EmbeddingCache(std::shared_ptr<EmbeddingProvider> provider, std::size_t dimension,
                   RetryPolicy retry = {})
        : provider_(std::move(provider)), dimension_(dimension), retry_(std::move(retry)) {}

    /// Throws Error on empty text, DimensionError when the provider returns
    /// a vector of the wrong length.
    Vector embed(const std::string& text);

    /// Batched variant for bulk embedding; order matches `texts`.
    std::vector<Vector> embed_many(std::span<const std::string> texts, std::size_t batch_size = 64);

    std::size_t provider_calls() const noexcept { return provider_calls_.load(); }
    std::size_t dimension() const noexcept { return dimension_; }

private:
    Vector checked(Vector v) const;

    std::shared_ptr<EmbeddingProvider> provider_;
    std::size_t dimension_;  // 0: unchecked
    RetryPolicy retry_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_future<Vector>> entries_;
    std::atomic<std::size_t> provider_calls_{0};
};

/// Text embedded for a graph node.
std::string node_embedding_text(const Node& node);

}  // namespace kgp
