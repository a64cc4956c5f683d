#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "speye/http.hpp"
#include "speye/page_scanner.hpp"
#include "speye/registry.hpp"
#include "speye/report.hpp"
#include "speye/scan_types.hpp"

/// A local web estate of synthetic relying-party sites and mock IdP
/// endpoints for offline end-to-end scans.
///
/// Page bodies and rule locations may use three placeholders, expanded once
/// the server knows its port: {origin} (http://127.0.0.1:PORT), {site}
/// ({origin}/NAME) and {idp} ({origin}/mock-idp/). Mock IdP URLs embed the
/// production host as the first path segment, e.g.
/// {idp}www.facebook.com/v9.0/dialog/oauth, and are recognized through
/// loopback_overlay().
namespace speye::fixtures {

struct ResponseRule {
    /// Site-relative path, e.g. "/auth/google".
    std::string path;
    std::optional<HttpMethod> method;
    /// Query or form fields that must all be present with these values.
    std::vector<QueryParam> when;
    /// Request headers that must be present for the rule to apply.
    std::vector<std::string> require_headers;
    int status = 302;
    std::optional<std::string> location;
    std::string body;
    std::string content_type = "text/html; charset=utf-8";
    net::Headers headers;
};

struct ExpectedIdp {
    IdpId idp = IdpId::facebook();
    ResultSource source = ResultSource::DrivenRedirect;
    std::vector<std::string> scopes;
};

/// Authored ground truth for one site.
struct ExpectedOutcome {
    std::optional<PatternClass> site_pattern;
    std::vector<ExpectedIdp> idps;
    std::vector<MissReason> misses;
    /// (trigger string, element) of every match before deduplication, when authored.
    std::optional<std::vector<std::pair<std::string, std::string>>> matches;
};

struct FixtureSite {
    std::string name;
    std::optional<PatternClass> pattern;
    std::string description;
    /// Site-relative path -> HTML body.
    std::map<std::string, std::string> pages;
    std::vector<ResponseRule> redirect_rules;
    ExpectedOutcome expected;
};

/// Reads one site directory (site.json plus page files).
FixtureSite load_site(const std::filesystem::path& directory);

/// Every site directory under `root`, sorted by name.
std::vector<FixtureSite> load_corpus(const std::filesystem::path& root);

struct RecordedRequest {
    std::string method;
    std::string path;
    net::Headers headers;
    std::string body;
};

class FixtureServer {
public:
    FixtureServer(std::vector<FixtureSite> corpus, const std::string& host, int port);
    ~FixtureServer();
    FixtureServer(const FixtureServer&) = delete;
    FixtureServer& operator=(const FixtureServer&) = delete;

    int port() const noexcept { return port_; }
    /// http://HOST:PORT
    std::string origin() const;
    std::string site_url(const std::string& name) const;

    /// Stops serving; safe to call more than once.
    void stop();

    std::vector<RecordedRequest> requests() const;
    void clear_requests();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string host_;
    int port_ = 0;
    std::thread thread_;
};

/// Binds (port 0 picks a free port) and serves the corpus on a background
/// thread. Throws BindError.
std::unique_ptr<FixtureServer> serve_fixtures(std::vector<FixtureSite> corpus, const std::string& host = "127.0.0.1",
                                              int port = 0);

/// `base` with every https endpoint pattern mirrored under the loopback
/// mock-IdP prefix. Production patterns are left untouched.
Registry loopback_overlay(const Registry& base);

}  // namespace speye::fixtures
