#include "kgprover/http_transport.hpp"

#include <httplib.h>

#include "kgprover/error.hpp"

namespace kgp {

namespace {

class HttplibTransport : public HttpTransport {
public:
    HttplibTransport(const std::string& base_url, std::chrono::seconds timeout) {
        auto scheme_end = base_url.find("://");
        if (scheme_end == std::string::npos) throw ConfigError("base URL lacks a scheme: " + base_url);
        auto path_start = base_url.find('/', scheme_end + 3);
        std::string origin = base_url.substr(0, path_start);
        if (path_start != std::string::npos) prefix_ = base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        client_ = std::make_unique<httplib::Client>(origin);
        if (!client_->is_valid()) throw ConfigError("unsupported base URL: " + base_url);
        client_->set_connection_timeout(timeout);
        client_->set_read_timeout(timeout);
        client_->set_write_timeout(timeout);
    }

    HttpResponse post_json(const std::string& path, const std::string& body,
                           const HttpHeaders& headers) override {
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto result = client_->Post(prefix_ + path, h, body, "application/json");
        if (!result)
            throw TransportError("HTTP request to " + prefix_ + path +
                                     " failed: " + httplib::to_string(result.error()),
                                 true);
        return {result->status, result->body};
    }

private:
    std::unique_ptr<httplib::Client> client_;
    std::string prefix_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::seconds timeout) {
    return std::make_unique<HttplibTransport>(base_url, timeout);
}

void raise_for_status(const HttpResponse& response, const std::string& what) {
    if (response.status >= 200 && response.status < 300) return;
    bool retryable = response.status == 408 || response.status == 429 || response.status >= 500;
    std::string snippet = response.body.substr(0, 300);
    throw TransportError(what + ": HTTP " + std::to_string(response.status) + " " + snippet, retryable);
}

}  // namespace kgp
