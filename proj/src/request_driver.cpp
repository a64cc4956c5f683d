#include "speye/request_driver.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <set>
#include <stdexcept>
#include <thread>

#include "speye/error.hpp"
#include "speye/text.hpp"
#include "speye/url.hpp"

namespace speye {
namespace {

bool is_redirect_status(int s)
{
    return s == 301 || s == 302 || s == 303 || s == 307 || s == 308;
}

net::Headers request_headers(const ScanConfig& config)
{
    return {{"User-Agent", config.user_agent},
            {"Accept", "text/html,application/xhtml+xml,application/xml;q=0.9,*/*;q=0.8"}};
}

std::string form_encode(const std::vector<QueryParam>& fields)
{
    std::string out;
    for (const auto& f : fields) {
        if (!out.empty()) out += '&';
        out += percent_encode(f.name) + "=" + percent_encode(f.value);
    }
    return out;
}

// Server refused the request because browser-managed fetch-metadata headers were absent.
bool looks_fetch_metadata_blocked(const net::HttpResponse& r)
{
    if (r.status != 400 && r.status != 403) return false;
    auto vary = r.header("Vary");
    if (vary && text::to_lower(*vary).find("sec-fetch") != std::string::npos) return true;
    return text::to_lower(r.body).find("sec-fetch") != std::string::npos;
}

// An IdP URL without parameters of its own (e.g. a login page) may carry the
// real authorization request in a query parameter such as "next".
std::optional<AuthorizationRequest> authorization_request_at(const std::string& url, const Registry& registry)
{
    if (auto req = parse_authorization_request(url, registry.matcher())) return req;
    for (const auto& [name, value] : decoded_query_pairs(url)) {
        auto nested = Url::try_parse(value);
        if (!nested || !registry.match_endpoint(value)) continue;
        if (auto req = parse_authorization_request(value, registry.matcher())) return req;
    }
    return std::nullopt;
}

std::string utc_timestamp()
{
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void ScanConfig::validate() const
{
    if (max_redirects < 1) throw std::invalid_argument("max_redirects must be at least 1");
    if (parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
    if (timeout.count() < 1) throw std::invalid_argument("timeout must be positive");
}

std::string_view to_string(ChainTerminal::Kind k)
{
    switch (k) {
    case ChainTerminal::Kind::IdpEndpoint: return "IdpEndpoint";
    case ChainTerminal::Kind::NonRedirectResponse: return "NonRedirectResponse";
    case ChainTerminal::Kind::DepthExceeded: return "DepthExceeded";
    case ChainTerminal::Kind::NetworkError: return "NetworkError";
    case ChainTerminal::Kind::Blocked: return "Blocked";
    }
    return "NetworkError";
}

std::string_view to_string(MissReason r)
{
    switch (r) {
    case MissReason::NonRedirect: return "NonRedirect";
    case MissReason::CsrfTokenRequired: return "CsrfTokenRequired";
    case MissReason::FetchMetadataBlocked: return "FetchMetadataBlocked";
    case MissReason::Timeout: return "Timeout";
    case MissReason::DepthExceeded: return "DepthExceeded";
    case MissReason::NetworkError: return "NetworkError";
    }
    return "NetworkError";
}

std::optional<MissReason> miss_reason_from_string(std::string_view s)
{
    for (auto r : {MissReason::NonRedirect, MissReason::CsrfTokenRequired, MissReason::FetchMetadataBlocked,
                   MissReason::Timeout, MissReason::DepthExceeded, MissReason::NetworkError}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

bool is_driveable(const SsoCandidate& c)
{
    switch (c.attribute_source) {
    case AttributeSource::HrefLink:
    case AttributeSource::FormSubmit:
    case AttributeSource::IframeSrc:
    case AttributeSource::TitleAttr:
        return true;
    case AttributeSource::ClickHandler:
    case AttributeSource::SdkCall:
        break;
    }
    return false;
}

RedirectChain resolve_candidate(const SsoCandidate& candidate, const ScanConfig& config, const Registry& registry,
                                net::HttpTransport& transport)
{
    RedirectChain chain;
    const std::size_t max_hops = static_cast<std::size_t>(std::max(config.max_redirects, 1)) + 1;

    if (!is_driveable(candidate)) {
        chain.hops.push_back({describe_target(candidate.target), std::nullopt, std::nullopt});
        chain.terminal = {ChainTerminal::Kind::Blocked, std::nullopt, 0, "script-driven; static extraction only"};
        return chain;
    }

    net::HttpRequest request;
    request.headers = request_headers(config);
    if (const auto* form = std::get_if<FormDescriptor>(&candidate.target)) {
        request.method = form->method;
        if (form->method == HttpMethod::Get) {
            Url action = Url::parse(form->action);
            action.query = form_encode(form->fields);
            action.fragment.reset();
            request.url = action.str();
        } else {
            request.url = form->action;
            request.body = form_encode(form->fields);
            request.content_type = "application/x-www-form-urlencoded";
        }
    } else {
        request.url = std::get<std::string>(candidate.target);
    }

    std::set<std::string> visited;
    for (;;) {
        if (chain.hops.size() >= max_hops) {
            chain.terminal = {ChainTerminal::Kind::DepthExceeded, std::nullopt, 0,
                              "more than " + std::to_string(config.max_redirects) + " redirects"};
            return chain;
        }
        if (!visited.insert(std::string(to_string(request.method)) + " " + request.url).second) {
            chain.terminal = {ChainTerminal::Kind::DepthExceeded, std::nullopt, 0, "redirect loop at " + request.url};
            return chain;
        }
        if (registry.match_endpoint(request.url)) {
            chain.hops.push_back({request.url, std::nullopt, std::nullopt});
            try {
                if (auto req = authorization_request_at(request.url, registry)) {
                    chain.terminal = {ChainTerminal::Kind::IdpEndpoint, std::move(req), 0, {}};
                    return chain;
                }
            } catch (const MalformedUrl&) {
            }
            chain.terminal = {ChainTerminal::Kind::NonRedirectResponse, std::nullopt, 0,
                              "identity provider URL without authorization parameters"};
            return chain;
        }

        auto result = transport.send(request, config.timeout);
        if (const auto* err = std::get_if<net::TransportError>(&result)) {
            chain.hops.push_back({request.url, std::nullopt, std::nullopt});
            chain.terminal = {ChainTerminal::Kind::NetworkError, std::nullopt, 0, err->message,
                              err->kind == net::TransportError::Kind::Timeout};
            return chain;
        }
        const auto& response = std::get<net::HttpResponse>(result);
        auto location = response.header("Location");
        chain.hops.push_back({request.url, response.status, location});

        if (!is_redirect_status(response.status) || !location) {
            if (looks_fetch_metadata_blocked(response)) {
                chain.terminal = {ChainTerminal::Kind::Blocked, std::nullopt, response.status,
                                  "request rejected without browser fetch-metadata headers"};
            } else {
                chain.terminal = {ChainTerminal::Kind::NonRedirectResponse, std::nullopt, response.status,
                                  "HTTP " + std::to_string(response.status) + " without redirect"};
            }
            return chain;
        }
        try {
            request.url = Url::parse(request.url).resolve(*location).str();
        } catch (const MalformedUrl& e) {
            chain.terminal = {ChainTerminal::Kind::NetworkError, std::nullopt, response.status,
                              std::string("bad Location header: ") + e.what()};
            return chain;
        }
        bool keep_method = response.status == 307 || response.status == 308;
        if (!keep_method) {
            request.method = HttpMethod::Get;
            request.body.clear();
            request.content_type.clear();
        }
    }
}

std::optional<ScanMiss> classify_miss(const SsoCandidate& candidate, const RedirectChain& chain,
                                      bool page_has_csrf_meta)
{
    const auto& t = chain.terminal;
    ScanMiss miss{candidate, MissReason::NonRedirect, t.reason};
    const std::string& last = chain.hops.empty() ? std::string{} : chain.hops.back().url;
    switch (t.kind) {
    case ChainTerminal::Kind::IdpEndpoint:
        return std::nullopt;
    case ChainTerminal::Kind::NonRedirectResponse:
        if (page_has_csrf_meta) {
            miss.reason = MissReason::CsrfTokenRequired;
            miss.detail = t.reason + " from " + last + "; page carries CSRF meta tokens that are not replayed";
        } else {
            miss.detail = t.reason + " from " + last;
        }
        break;
    case ChainTerminal::Kind::Blocked:
        miss.reason = MissReason::FetchMetadataBlocked;
        miss.detail = t.reason + " (HTTP " + std::to_string(t.status) + " from " + last + ")";
        break;
    case ChainTerminal::Kind::DepthExceeded:
        miss.reason = MissReason::DepthExceeded;
        break;
    case ChainTerminal::Kind::NetworkError:
        miss.reason = t.timed_out ? MissReason::Timeout : MissReason::NetworkError;
        miss.detail = t.reason + " at " + last;
        break;
    }
    return miss;
}

ScanReport scan_rp(std::string_view url_text, const ScanConfig& config, const Registry& registry,
                   net::HttpTransport& transport)
{
    config.validate();
    Url page_url = Url::parse(url_text);

    // The page fetch itself may be redirected (e.g. to a canonical host).
    net::HttpRequest page_request;
    page_request.url = page_url.str();
    page_request.headers = request_headers(config);
    net::HttpResponse page;
    for (int redirects = 0;; ++redirects) {
        auto result = transport.send(page_request, config.timeout);
        if (const auto* err = std::get_if<net::TransportError>(&result)) {
            throw PageFetchError("cannot fetch " + page_request.url + ": " + err->message);
        }
        page = std::get<net::HttpResponse>(std::move(result));
        auto location = page.header("Location");
        if (!is_redirect_status(page.status) || !location) break;
        if (redirects >= config.max_redirects) throw PageFetchError("too many redirects fetching " + page_url.str());
        page_url = page_url.resolve(*location);
        page_request.url = page_url.str();
    }
    if (page.status < 200 || page.status >= 300) {
        throw PageFetchError("HTTP " + std::to_string(page.status) + " fetching " + page_url.str());
    }
    html::Document document = parse_page(page.body, page.header("Content-Type").value_or(""));

    const auto candidates = find_sso_candidates(document, page_url, registry);
    const auto classification = classify_pattern(document, candidates, registry);
    ScanEvidence evidence;
    evidence.findings = extract_sdk_scopes(document);
    const bool csrf_meta = !csrf_meta_names(document).empty();

    std::vector<std::size_t> driveable;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (is_driveable(candidates[i])) driveable.push_back(i);
    }
    std::vector<RedirectChain> chains(candidates.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < driveable.size(); k = next++) {
            std::size_t i = driveable[k];
            chains[i] = resolve_candidate(candidates[i], config, registry, transport);
        }
    };
    {
        std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), driveable.size());
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (is_driveable(c)) {
            if (auto miss = classify_miss(c, chains[i], csrf_meta)) {
                evidence.misses.push_back(std::move(*miss));
            } else {
                evidence.chains.push_back(std::move(chains[i]));
            }
            continue;
        }
        // A script-driven option is covered when a literal SDK call for the same IdP was found.
        bool covered = classification.per_candidate[i] == PatternClass::SdkBased && c.idp_hint &&
                       std::any_of(evidence.findings.begin(), evidence.findings.end(),
                                   [&](const SdkScopeFinding& f) { return f.idp == *c.idp_hint; });
        if (!covered) {
            evidence.misses.push_back({c, MissReason::NonRedirect, "script-driven; static extraction only"});
        }
    }

    std::optional<std::string> scanned_at;
    if (!config.deterministic_mode) scanned_at = utc_timestamp();
    return build_comparative_report(page_url.origin(), classification.site, evidence, registry, scanned_at);
}

FocusedReport focused_scan(std::string_view idp_url, const Registry& registry)
{
    Url::parse(idp_url);
    if (!registry.match_endpoint(idp_url)) throw NotAnIdpUrl(std::string(idp_url));
    auto request = parse_authorization_request(idp_url, registry.matcher());
    if (!request) throw NotAnIdpUrl(std::string(idp_url) + " (no authorization parameters)");
    return build_focused_report(*request, registry);
}

}  // namespace speye
