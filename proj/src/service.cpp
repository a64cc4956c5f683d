#include "speye/service.hpp"

#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "speye/authorization_request.hpp"
#include "speye/error.hpp"
#include "speye/report.hpp"
#include "speye/request_driver.hpp"

namespace speye::service {
namespace {

using nlohmann::json;

ApiResponse ok(const json& document)
{
    return {200, canonical_dump(document)};
}

std::optional<std::string> single_param(const QueryParams& query, const std::string& name)
{
    if (query.count(name) != 1) return std::nullopt;
    return query.find(name)->second;
}

std::optional<ApiResponse> unexpected_params(const QueryParams& query, std::initializer_list<std::string_view> allowed)
{
    for (const auto& [name, value] : query) {
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
            return api_error(400, kInvalidUrl, "unexpected query parameter: " + name);
        }
    }
    return std::nullopt;
}

}  // namespace

ApiResponse api_error(int status, std::string_view code, std::string_view message)
{
    return {status, canonical_dump(json{{"code", code}, {"message", message}})};
}

Api::Api(const Registry& registry, net::HttpTransport& transport, ScanConfig config)
    : registry_(registry), transport_(transport), config_(std::move(config))
{
    config_.validate();
}

ApiResponse Api::scan(const QueryParams& query) const
{
    if (auto bad = unexpected_params(query, {"url"})) return *bad;
    auto url = single_param(query, "url");
    if (!url) return api_error(400, kInvalidUrl, "exactly one url parameter is required");
    try {
        return ok(to_json(scan_rp(*url, config_, registry_, transport_)));
    } catch (const MalformedUrl& e) {
        return api_error(400, kInvalidUrl, e.what());
    } catch (const PageFetchError& e) {
        return api_error(502, kFetchFailed, e.what());
    } catch (const std::exception& e) {
        return api_error(500, kInternal, e.what());
    }
}

ApiResponse Api::focused(const QueryParams& query) const
{
    if (auto bad = unexpected_params(query, {"url"})) return *bad;
    auto url = single_param(query, "url");
    if (!url) return api_error(400, kInvalidUrl, "exactly one url parameter is required");
    try {
        return ok(to_json(focused_scan(*url, registry_)));
    } catch (const MalformedUrl& e) {
        return api_error(400, kInvalidUrl, e.what());
    } catch (const NotAnIdpUrl& e) {
        return api_error(400, kNotIdpUrl, e.what());
    } catch (const std::exception& e) {
        return api_error(500, kInternal, e.what());
    }
}

ApiResponse Api::optout(std::string_view body) const
{
    json request = json::parse(body, nullptr, false);
    if (request.is_discarded() || !request.is_object() || !request.contains("url") || !request["url"].is_string() ||
        !request.contains("scopes") || !request["scopes"].is_array()) {
        return api_error(400, kInvalidUrl, "expected {\"url\": string, \"scopes\": [string]}");
    }
    OptOutSet optout;
    for (const auto& s : request["scopes"]) {
        if (!s.is_string()) return api_error(400, kInvalidUrl, "scopes must be strings");
        optout.scopes.insert(s.get<std::string>());
    }
    const auto url = request["url"].get<std::string>();
    try {
        if (!registry_.match_endpoint(url)) return api_error(400, kNotIdpUrl, "not an identity provider URL: " + url);
        auto parsed = parse_authorization_request(url, registry_.matcher());
        if (!parsed) return api_error(400, kNotIdpUrl, "no authorization parameters in " + url);
        return ok(json{{"rewritten_url", rewrite_without_scopes(*parsed, optout)}});
    } catch (const MalformedUrl& e) {
        return api_error(400, kInvalidUrl, e.what());
    } catch (const OptOutNotPresent& e) {
        return api_error(400, kInvalidUrl, e.what());
    } catch (const std::exception& e) {
        return api_error(500, kInternal, e.what());
    }
}

ApiResponse Api::registry(const QueryParams& query) const
{
    if (auto bad = unexpected_params(query, {"idp"})) return *bad;
    std::optional<IdpId> only;
    if (query.count("idp") > 1) return api_error(400, kInvalidUrl, "idp may be given once");
    if (auto name = single_param(query, "idp")) {
        only = IdpId::from_name(*name);
        bool known = only && std::find(registry_.display_order().begin(), registry_.display_order().end(), *only) !=
                                 registry_.display_order().end();
        if (!known) return api_error(400, kInvalidUrl, "unknown identity provider: " + *name);
    }
    json idps = json::array();
    for (const auto& idp : registry_.display_order()) {
        if (only && idp != *only) continue;
        int basic = 0;
        int extended = 0;
        int endpoints = 0;
        for (const auto& p : registry_.permissions()) {
            if (p.idp != idp) continue;
            ++(p.category == PermissionCategory::Basic ? basic : extended);
        }
        for (const auto& e : registry_.endpoint_patterns()) endpoints += e.idp == idp;
        idps.push_back({{"idp", idp.name()},
                        {"display_name", idp.display_name()},
                        {"endpoint_patterns", endpoints},
                        {"scope_counts", {{"basic", basic}, {"extended", extended}}}});
    }
    return ok(json{{"idps", idps}});
}

struct Server::Impl {
    httplib::Server http;
    std::once_flag stopped;
};

Server::Server(const Api& api, ServiceOptions options) : impl_(std::make_unique<Impl>()), options_(std::move(options))
{
    auto& http = impl_->http;
    // httplib's default also sets SO_REUSEPORT, which lets a second server share a busy port.
    http.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    port_ = options_.port == 0 ? http.bind_to_any_port(options_.host)
                               : (http.bind_to_port(options_.host, options_.port) ? options_.port : -1);
    if (port_ <= 0) {
        throw BindError("cannot bind service to " + options_.host + ":" + std::to_string(options_.port));
    }

    const bool cors = options_.allow_any_origin;
    auto send = [cors](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        if (cors) res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(r.body, "application/json; charset=utf-8");
    };
    auto params = [](const httplib::Request& req) {
        QueryParams q;
        for (const auto& [k, v] : req.params) q.emplace(k, v);
        return q;
    };

    http.Get("/api/scan", [&api, send, params](const httplib::Request& req, httplib::Response& res) {
        send(res, api.scan(params(req)));
    });
    http.Get("/api/focused", [&api, send, params](const httplib::Request& req, httplib::Response& res) {
        send(res, api.focused(params(req)));
    });
    http.Post("/api/optout", [&api, send](const httplib::Request& req, httplib::Response& res) {
        send(res, api.optout(req.body));
    });
    http.Get("/api/registry", [&api, send, params](const httplib::Request& req, httplib::Response& res) {
        send(res, api.registry(params(req)));
    });
    if (cors) {
        http.Options("/api/.*", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
    }
    if (options_.static_dir && !http.set_mount_point("/", options_.static_dir->string())) {
        throw Error("static directory not found: " + options_.static_dir->string());
    }
    http.set_error_handler([send](const httplib::Request& req, httplib::Response& res) {
        if (req.path.starts_with("/api/") && res.body.empty()) {
            send(res, api_error(res.status, res.status == 404 ? kInvalidUrl : kInternal,
                                "no such endpoint: " + req.method + " " + req.path));
        }
    });

    thread_ = std::thread([impl = impl_.get()] { impl->http.listen_after_bind(); });
    http.wait_until_ready();
}

Server::~Server()
{
    stop();
}

std::string Server::origin() const
{
    return "http://" + options_.host + ":" + std::to_string(port_);
}

void Server::stop()
{
    std::call_once(impl_->stopped, [this] {
        impl_->http.stop();
        if (thread_.joinable()) thread_.join();
    });
}

}  // namespace speye::service
