#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace speye {

enum class HttpMethod { Get, Post };

std::string_view to_string(HttpMethod m);

namespace net {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct HttpRequest {
    HttpMethod method = HttpMethod::Get;
    std::string url;
    Headers headers;
    std::string body;
    std::string content_type;
};

struct HttpResponse {
    int status = 0;
    Headers headers;
    std::string body;

    /// Case-insensitive lookup of the first header named `name`.
    std::optional<std::string> header(std::string_view name) const;
};

struct TransportError {
    enum class Kind { Timeout, Connection, Tls, Other };

    Kind kind = Kind::Other;
    std::string message;
};

using TransportResult = std::variant<HttpResponse, TransportError>;

/// Issues exactly one HTTP request: no redirect following, no cookie jar,
/// no stored credentials.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual TransportResult send(const HttpRequest& request, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport. Honors http_proxy / https_proxy / no_proxy.
std::shared_ptr<HttpTransport> make_http_transport();

/// Observes every outbound request issued through any transport while alive.
class TrafficRecorder {
public:
    TrafficRecorder();
    ~TrafficRecorder();
    TrafficRecorder(const TrafficRecorder&) = delete;
    TrafficRecorder& operator=(const TrafficRecorder&) = delete;

    std::size_t count() const;
    std::vector<std::string> urls() const;

private:
    friend void record_outbound(const HttpRequest& request);

    struct State;
    std::unique_ptr<State> state_;
};

/// Transports call this before any bytes leave the process.
void record_outbound(const HttpRequest& request);

}  // namespace net
}  // namespace speye
