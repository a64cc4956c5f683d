#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "speye/http.hpp"
#include "speye/registry.hpp"
#include "speye/scan_types.hpp"

namespace speye::service {

/// Error codes of the API, a closed set.
inline constexpr std::string_view kInvalidUrl = "invalid_url";
inline constexpr std::string_view kNotIdpUrl = "not_idp_url";
inline constexpr std::string_view kFetchFailed = "fetch_failed";
inline constexpr std::string_view kInternal = "internal";

struct ApiResponse {
    int status = 200;
    /// Canonical JSON document.
    std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

/// The API endpoints as plain functions of their inputs.
class Api {
public:
    Api(const Registry& registry, net::HttpTransport& transport, ScanConfig config);

    /// GET /api/scan?url=
    ApiResponse scan(const QueryParams& query) const;
    /// GET /api/focused?url=
    ApiResponse focused(const QueryParams& query) const;
    /// POST /api/optout with {"url": ..., "scopes": [...]}
    ApiResponse optout(std::string_view body) const;
    /// GET /api/registry[?idp=NAME]
    ApiResponse registry(const QueryParams& query) const;

private:
    const Registry& registry_;
    net::HttpTransport& transport_;
    ScanConfig config_;
};

ApiResponse api_error(int status, std::string_view code, std::string_view message);

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 7465;
    /// Adds Access-Control-Allow-Origin: * to API responses.
    bool allow_any_origin = false;
    /// Dashboard bundle served at "/".
    std::optional<std::filesystem::path> static_dir;
};

/// HTTP front end for Api on a background thread.
class Server {
public:
    /// Binds immediately (port 0 picks a free port). Throws BindError.
    Server(const Api& api, ServiceOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    int port() const noexcept { return port_; }
    std::string origin() const;
    /// Safe to call more than once.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    ServiceOptions options_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace speye::service
