#include <json.hpp>

#include <fstream>

#include "kgprover/error.hpp"
#include "kgprover/model_gateway.hpp"
#include "kgprover/text_util.hpp"

namespace kgp {

ModelResponse ChatBackend::complete(const PromptBundle& prompt, const SamplingParams& params,
                                    const RequestTag& tag) {
    int retries = 0;
    auto response = with_retries(retry_, [&] { return send(prompt, params, tag); }, &retries);
    response.retries = retries;
    return response;
}

MockChatBackend::MockChatBackend(const std::filesystem::path& script) {
    std::ifstream in(script);
    if (!in) throw ConfigError("cannot open mock chat script " + script.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            auto id = parse_template_id(j.at("template_id").get<std::string>());
            if (!id) throw FormatError(script.filename().string(), line_no, "unknown template_id");
            add(j.at("problem_id").get<std::string>(), *id, j.at("turn").get<int>(),
                j.at("response_text").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(script.filename().string(), line_no, e.what());
        }
    }
}

void MockChatBackend::add(const std::string& problem_id, TemplateId id, int turn, std::string text) {
    std::lock_guard lock(mutex_);
    script_[{problem_id, id}][turn] = std::move(text);
}

int MockChatBackend::calls(const std::string& problem_id, TemplateId id) const {
    std::lock_guard lock(mutex_);
    auto it = cursor_.find({problem_id, id});
    return it == cursor_.end() ? 0 : it->second;
}

std::size_t MockChatBackend::total_calls() const {
    std::lock_guard lock(mutex_);
    std::size_t total = 0;
    for (const auto& [key, n] : cursor_) total += static_cast<std::size_t>(n);
    return total;
}

ModelResponse MockChatBackend::send(const PromptBundle& prompt, const SamplingParams&, const RequestTag& tag) {
    std::lock_guard lock(mutex_);
    Key key{tag.problem_id, prompt.template_id};
    int turn = ++cursor_[key];
    auto script = script_.find(key);
    if (script == script_.end() || !script->second.contains(turn))
        throw ScriptExhaustedError("mock chat script has no turn " + std::to_string(turn) + " for problem '" +
                                   tag.problem_id + "' template " + std::string(to_string(prompt.template_id)));
    ModelResponse r;
    r.text = script->second.at(turn);
    r.backend_id = "mock";
    r.usage.prompt_tokens = (prompt.text().size() + 3) / 4;
    r.usage.completion_tokens = (r.text.size() + 3) / 4;
    return r;
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config, std::unique_ptr<HttpTransport> transport, RetryPolicy retry)
    : ChatBackend(std::move(retry)),
      config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_in_flight, 1, 1024))) {}

ModelResponse HttpChatBackend::send(const PromptBundle& prompt, const SamplingParams& params, const RequestTag&) {
    nlohmann::json request;
    request["model"] = config_.model;
    request["messages"] = nlohmann::json::array({
        {{"role", "system"}, {"content", prompt.role_header}},
        {{"role", "user"}, {"content", prompt.body}},
    });
    request["temperature"] = params.temperature;
    request["top_p"] = params.top_p;
    request["max_tokens"] = params.max_tokens;
    if (params.seed) request["seed"] = *params.seed;

    HttpHeaders headers;
    if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

    HttpResponse http;
    in_flight_.acquire();
    try {
        http = transport_->post_json("/chat/completions", request.dump(), headers);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();
    raise_for_status(http, "chat request");

    ModelResponse r;
    r.backend_id = id();
    try {
        auto j = nlohmann::json::parse(http.body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        r.text = content.is_null() ? std::string{} : content.get<std::string>();
        if (j.contains("usage") && j["usage"].is_object()) {
            r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
            r.usage.completion_tokens = j["usage"].value("completion_tokens", std::size_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed chat response: ") + e.what(), false);
    }
    return r;
}

}  // namespace kgp
