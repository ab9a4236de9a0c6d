#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace kgp {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Minimal JSON-over-HTTP POST surface so backends can be driven by a fake in tests.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    /// Throws TransportError (retryable) when no response arrives at all.
    virtual HttpResponse post_json(const std::string& path, const std::string& body,
                                   const HttpHeaders& headers) = 0;
};

/// `base_url` like "https://api.example.com/v1"; any path component is
/// prefixed to every request path.
std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   std::chrono::seconds timeout);

/// Maps a non-2xx response to a TransportError; 408/429/5xx are retryable.
void raise_for_status(const HttpResponse& response, const std::string& what);

}  // namespace kgp
