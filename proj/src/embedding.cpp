#include "kgprover/embedding.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "kgprover/error.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw DimensionError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i], y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) throw DomainError("cosine: zero-norm vector");
    // rounding can push near-parallel pairs just past the unit bound
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

MockEmbeddingProvider::MockEmbeddingProvider(const std::filesystem::path& table) {
    std::ifstream in(table);
    if (!in) throw ConfigError("cannot open mock embedding table " + table.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            table_[j.at("text_hash").get<std::string>()] = j.at("vector").get<Vector>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(table.filename().string(), line_no, e.what());
        }
    }
}

std::vector<Vector> MockEmbeddingProvider::embed(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto hash = text::sha256_hex(t);
        auto it = table_.find(hash);
        if (it == table_.end())
            throw TransportError("mock embedding table has no vector for text hash " + hash, false);
        out.push_back(it->second);
    }
    return out;
}

std::vector<Vector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
    nlohmann::json request;
    request["model"] = config_.model;
    request["input"] = nlohmann::json::array();
    for (const auto& t : texts) request["input"].push_back(t);
    HttpHeaders headers;
    if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
    auto response = transport_->post_json("/embeddings", request.dump(), headers);
    raise_for_status(response, "embedding request");
    std::vector<Vector> out(texts.size());
    try {
        auto j = nlohmann::json::parse(response.body);
        const auto& data = j.at("data");
        if (data.size() != texts.size())
            throw TransportError("embedding response has " + std::to_string(data.size()) +
                                     " vectors for " + std::to_string(texts.size()) + " inputs",
                                 false);
        for (std::size_t i = 0; i < data.size(); ++i) {
            std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
            if (slot >= out.size()) throw TransportError("embedding response index out of range", false);
            out[slot] = data[i].at("embedding").get<Vector>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed embedding response: ") + e.what(), false);
    }
    return out;
}

Vector EmbeddingCache::checked(Vector v) const {
    if (dimension_ != 0 && v.size() != dimension_)
        throw DimensionError("provider returned dimension " + std::to_string(v.size()) +
                             ", expected " + std::to_string(dimension_));
    for (float x : v)
        if (!std::isfinite(x)) throw DomainError("provider returned a non-finite embedding value");
    return v;
}

Vector EmbeddingCache::embed(const std::string& text) {
    if (text::trim(text).empty()) throw Error("cannot embed empty text");
    auto key = text::sha256_hex(text);
    std::promise<Vector> promise;
    std::shared_future<Vector> future;
    bool owner = false;
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            future = it->second;
        } else {
            future = promise.get_future().share();
            entries_.emplace(key, future);
            owner = true;
        }
    }
    if (owner) {
        try {
            auto v = with_retries(retry_, [&] {
                ++provider_calls_;
                std::string one[] = {text};
                auto batch = provider_->embed(one);
                if (batch.size() != 1) throw TransportError("provider returned no vector", false);
                return std::move(batch.front());
            });
            promise.set_value(checked(std::move(v)));
        } catch (...) {
            {
                std::lock_guard lock(mutex_);
                entries_.erase(key);
            }
            promise.set_exception(std::current_exception());
        }
    }
    return future.get();
}

std::vector<Vector> EmbeddingCache::embed_many(std::span<const std::string> texts, std::size_t batch_size) {
    if (batch_size == 0) batch_size = 1;
    std::vector<std::string> missing;
    {
        std::lock_guard lock(mutex_);
        std::unordered_map<std::string, bool> queued;
        for (const auto& t : texts) {
            if (text::trim(t).empty()) throw Error("cannot embed empty text");
            auto key = text::sha256_hex(t);
            if (!entries_.contains(key) && queued.emplace(key, true).second) missing.push_back(t);
        }
    }
    for (std::size_t start = 0; start < missing.size(); start += batch_size) {
        std::span<const std::string> batch(missing.data() + start,
                                           std::min(batch_size, missing.size() - start));
        auto vectors = with_retries(retry_, [&] {
            ++provider_calls_;
            return provider_->embed(batch);
        });
        if (vectors.size() != batch.size()) throw TransportError("provider returned too few vectors", false);
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::promise<Vector> p;
            p.set_value(checked(std::move(vectors[i])));
            entries_.emplace(text::sha256_hex(batch[i]), p.get_future().share());
        }
    }
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

std::string node_embedding_text(const Node& node) { return node.title + "\n\n" + node.content; }

}  // namespace kgp
