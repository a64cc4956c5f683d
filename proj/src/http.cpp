#include "speye/http.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>

#include <httplib.h>

#include "speye/text.hpp"
#include "speye/url.hpp"

namespace speye {

std::string_view to_string(HttpMethod m)
{
    return m == HttpMethod::Get ? "GET" : "POST";
}

namespace net {

struct TrafficRecorder::State {
    mutable std::mutex mutex;
    std::vector<std::string> urls;
};

namespace {

std::mutex g_recorders_mutex;
std::vector<TrafficRecorder*> g_recorders;

struct Proxy {
    std::string host;
    int port = 0;
};

std::optional<std::string> env(const char* lower, const char* upper)
{
    if (const char* v = std::getenv(lower); v && *v) return std::string(v);
    if (const char* v = std::getenv(upper); v && *v) return std::string(v);
    return std::nullopt;
}

bool bypass_proxy(const std::string& host)
{
    if (host == "127.0.0.1" || host == "localhost" || host == "[::1]") return true;
    auto no_proxy = env("no_proxy", "NO_PROXY");
    if (!no_proxy) return false;
    for (auto entry : text::split(*no_proxy, ',')) {
        std::string_view e = text::trim(entry);
        if (e == "*") return true;
        if (!e.empty() && e.front() == '.') e.remove_prefix(1);
        if (!e.empty() && (host == e || (host.size() > e.size() && host.ends_with(e) &&
                                         host[host.size() - e.size() - 1] == '.'))) {
            return true;
        }
    }
    return false;
}

std::optional<Proxy> proxy_for(const Url& url)
{
    if (bypass_proxy(url.host)) return std::nullopt;
    auto setting = url.scheme == "https" ? env("https_proxy", "HTTPS_PROXY") : env("http_proxy", "HTTP_PROXY");
    if (!setting) return std::nullopt;
    std::string value = *setting;
    if (value.find("://") == std::string::npos) value = "http://" + value;
    auto parsed = Url::try_parse(value);
    if (!parsed) return std::nullopt;
    return Proxy{parsed->host, parsed->port.value_or(parsed->scheme == "https" ? 443 : 80)};
}

class HttplibTransport final : public HttpTransport {
public:
    TransportResult send(const HttpRequest& request, std::chrono::milliseconds timeout) override
    {
        record_outbound(request);
        auto url = Url::try_parse(request.url);
        if (!url) return TransportError{TransportError::Kind::Other, "malformed URL " + request.url};

        httplib::Client client(url->origin());
        client.set_follow_location(false);
        client.set_keep_alive(false);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        client.enable_server_certificate_verification(true);
        if (auto proxy = proxy_for(*url)) client.set_proxy(proxy->host, proxy->port);

        httplib::Headers headers;
        for (const auto& [name, value] : request.headers) headers.emplace(name, value);
        std::string target = url->path + (url->query ? "?" + *url->query : "");

        const auto started = std::chrono::steady_clock::now();
        httplib::Result result = request.method == HttpMethod::Get
                                     ? client.Get(target, headers)
                                     : client.Post(target, headers, request.body,
                                                   request.content_type.empty() ? "application/x-www-form-urlencoded"
                                                                                : request.content_type);
        if (!result) {
            auto elapsed = std::chrono::steady_clock::now() - started;
            httplib::Error err = result.error();
            TransportError e;
            e.message = httplib::to_string(err);
            if (err == httplib::Error::ConnectionTimeout || elapsed >= timeout) {
                e.kind = TransportError::Kind::Timeout;
            } else if (err == httplib::Error::SSLConnection || err == httplib::Error::SSLServerVerification ||
                       err == httplib::Error::SSLLoadingCerts) {
                e.kind = TransportError::Kind::Tls;
            } else if (err == httplib::Error::Connection) {
                e.kind = TransportError::Kind::Connection;
            }
            return e;
        }
        HttpResponse response;
        response.status = result->status;
        response.body = result->body;
        for (const auto& [name, value] : result->headers) response.headers.emplace_back(name, value);
        return response;
    }
};

}  // namespace

std::optional<std::string> HttpResponse::header(std::string_view name) const
{
    for (const auto& [n, v] : headers) {
        if (text::iequals(n, name)) return v;
    }
    return std::nullopt;
}

std::shared_ptr<HttpTransport> make_http_transport()
{
    return std::make_shared<HttplibTransport>();
}

TrafficRecorder::TrafficRecorder() : state_(std::make_unique<State>())
{
    std::lock_guard lock(g_recorders_mutex);
    g_recorders.push_back(this);
}

TrafficRecorder::~TrafficRecorder()
{
    std::lock_guard lock(g_recorders_mutex);
    g_recorders.erase(std::remove(g_recorders.begin(), g_recorders.end(), this), g_recorders.end());
}

std::size_t TrafficRecorder::count() const
{
    std::lock_guard lock(state_->mutex);
    return state_->urls.size();
}

std::vector<std::string> TrafficRecorder::urls() const
{
    std::lock_guard lock(state_->mutex);
    return state_->urls;
}

void record_outbound(const HttpRequest& request)
{
    std::lock_guard lock(g_recorders_mutex);
    for (TrafficRecorder* r : g_recorders) {
        std::lock_guard inner(r->state_->mutex);
        r->state_->urls.push_back(request.url);
    }
}

}  // namespace net
}  // namespace speye
