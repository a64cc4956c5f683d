#include "speye/authorization_request.hpp"

#include <algorithm>
#include <array>

#include "speye/error.hpp"
#include "speye/text.hpp"
#include "speye/url.hpp"

namespace speye {

OptOutNotPresent::OptOutNotPresent(std::vector<std::string> missing)
    : Error([&] {
          std::string msg = "scope not present in request:";
          for (const auto& m : missing) msg += " " + m;
          return msg;
      }()),
      missing_(std::move(missing))
{
}

namespace {

struct DelimiterSpelling {
    std::string_view raw;
    ScopeDelimiter kind;
};

// Longest spellings first so "%2C" is not read as a literal '%'.
constexpr std::array<DelimiterSpelling, 6> kDelimiters = {{
    {"%2C", ScopeDelimiter::Comma},
    {"%2c", ScopeDelimiter::Comma},
    {"%20", ScopeDelimiter::Space},
    {",", ScopeDelimiter::Comma},
    {"+", ScopeDelimiter::Plus},
    {" ", ScopeDelimiter::Space},
}};

std::string_view join_spelling(ScopeDelimiter d)
{
    switch (d) {
    case ScopeDelimiter::Comma: return ",";
    case ScopeDelimiter::Space: return "%20";
    case ScopeDelimiter::Plus: return "+";
    case ScopeDelimiter::None: break;
    }
    return "%20";
}

}  // namespace

std::string_view to_string(ScopeDelimiter d)
{
    switch (d) {
    case ScopeDelimiter::None: return "none";
    case ScopeDelimiter::Comma: return "comma";
    case ScopeDelimiter::Space: return "space";
    case ScopeDelimiter::Plus: return "plus";
    }
    return "none";
}

std::string FlowKind::str() const
{
    switch (kind) {
    case Kind::AuthorizationCode: return "AuthorizationCode";
    case Kind::Implicit: return "Implicit";
    case Kind::OidcVariant: return "OidcVariant(" + response_type + ")";
    case Kind::Unknown: break;
    }
    return "Unknown";
}

ScopeSplit split_scope(std::string_view raw)
{
    ScopeSplit out;
    auto flush = [&](std::string_view piece) {
        std::string decoded = std::string(text::trim(percent_decode(piece)));
        if (decoded.empty()) return;
        out.tokens.push_back(std::move(decoded));
        out.raw_tokens.emplace_back(piece);
    };
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < raw.size()) {
        const DelimiterSpelling* hit = nullptr;
        for (const auto& d : kDelimiters) {
            if (raw.substr(i, d.raw.size()) == d.raw) {
                hit = &d;
                break;
            }
        }
        if (hit == nullptr) {
            ++i;
            continue;
        }
        if (out.delimiter == ScopeDelimiter::None) {
            out.delimiter = hit->kind;
            out.raw_delimiter = std::string(hit->raw);
        }
        flush(raw.substr(start, i - start));
        i += hit->raw.size();
        start = i;
    }
    flush(raw.substr(start));
    return out;
}

std::optional<AuthorizationRequest> parse_authorization_request(std::string_view url_text,
                                                                const IdpMatcher& matcher)
{
    Url url = Url::parse(url_text);
    AuthorizationRequest req;
    req.raw_url = std::string(url_text);
    req.endpoint = url.endpoint();

    bool oauth_marker = false;
    auto take = [](std::optional<std::string>& field, std::string value) {
        if (field) return false;
        field = std::move(value);
        return true;
    };
    for (const auto& raw : split_query(url.query.value_or(""))) {
        std::string name = percent_decode(raw.name, true);
        bool consumed = false;
        if (name == "scope" && !req.scope_present) {
            ScopeSplit split = split_scope(raw.value);
            req.scopes = std::move(split.tokens);
            req.scope_delimiter = split.delimiter;
            req.scope_present = true;
            oauth_marker = true;
            continue;
        }
        {
            std::string value = percent_decode(raw.value, true);
            if (name == "client_id") {
                consumed = take(req.client_id, value);
                oauth_marker = true;
            } else if (name == "response_type") {
                consumed = take(req.response_type, value);
                oauth_marker = true;
            } else if (name == "redirect_uri") {
                consumed = take(req.redirect_uri, value);
            } else if (name == "state") {
                consumed = take(req.state, value);
            } else if (name == "nonce") {
                consumed = take(req.nonce, value);
            }
            if (!consumed) req.extra_params.push_back({std::move(name), std::move(value)});
        }
    }
    if (!oauth_marker) return std::nullopt;
    if (matcher) req.idp = matcher(req.raw_url);
    return req;
}

FlowKind classify_flow(const AuthorizationRequest& req)
{
    bool openid = std::find(req.scopes.begin(), req.scopes.end(), "openid") != req.scopes.end();
    if (!req.response_type) {
        if (openid) return {FlowKind::Kind::OidcVariant, ""};
        return {};
    }
    const std::string& rt = *req.response_type;
    std::string normalized = text::normalize(rt);
    if (text::find_word(normalized, "id_token") != std::string::npos || openid) {
        return {FlowKind::Kind::OidcVariant, rt};
    }
    if (rt == "code") return {FlowKind::Kind::AuthorizationCode, ""};
    if (rt == "token") return {FlowKind::Kind::Implicit, ""};
    return {};
}

std::string rewrite_without_scopes(const AuthorizationRequest& req, const OptOutSet& optout)
{
    std::vector<std::string> missing;
    for (const auto& token : optout.scopes) {
        if (std::find(req.scopes.begin(), req.scopes.end(), token) == req.scopes.end()) {
            missing.push_back(token);
        }
    }
    if (!missing.empty()) throw OptOutNotPresent(std::move(missing));
    if (optout.scopes.empty()) return req.raw_url;

    Url url = Url::parse(req.raw_url);
    auto params = split_query(url.query.value_or(""));
    for (auto& p : params) {
        if (percent_decode(p.name, true) != "scope") continue;
        ScopeSplit split = split_scope(p.value);
        std::string joined;
        for (std::size_t i = 0; i < split.tokens.size(); ++i) {
            if (optout.scopes.contains(split.tokens[i])) continue;
            if (!joined.empty()) joined += split.raw_delimiter;
            joined += split.raw_tokens[i];
        }
        p.value = std::move(joined);
        p.has_equals = true;
        break;
    }
    url.query = join_query(params);
    return url.str();
}

std::string to_url(const AuthorizationRequest& req)
{
    std::vector<RawQueryParam> params;
    auto add = [&](std::string_view name, const std::optional<std::string>& value) {
        if (value) params.push_back({std::string(name), percent_encode(*value), true});
    };
    add("client_id", req.client_id);
    add("redirect_uri", req.redirect_uri);
    add("response_type", req.response_type);
    if (req.scope_present) {
        std::string joined;
        for (const auto& token : req.scopes) {
            if (!joined.empty()) joined += join_spelling(req.scope_delimiter);
            joined += percent_encode(token);
        }
        params.push_back({"scope", std::move(joined), true});
    }
    add("state", req.state);
    add("nonce", req.nonce);
    for (const auto& p : req.extra_params) {
        params.push_back({percent_encode(p.name), percent_encode(p.value), true});
    }
    std::string out = req.endpoint;
    if (!params.empty()) out += "?" + join_query(params);
    return out;
}

}  // namespace speye
