#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "speye/idp.hpp"

namespace speye {

/// How the scope tokens of a request were joined. Facebook uses commas,
/// Google and OIDC providers use (encoded) spaces, some RPs use '+'.
enum class ScopeDelimiter { None, Comma, Space, Plus };

std::string_view to_string(ScopeDelimiter d);

struct QueryParam {
    std::string name;
    std::string value;

    friend bool operator==(const QueryParam&, const QueryParam&) = default;
};

/// Maps a full URL to the identity provider whose endpoint it targets.
using IdpMatcher = std::function<std::optional<IdpId>(std::string_view url)>;

/// An OAuth 2.0 / OpenID Connect authorization request carried in a URL.
/// Values are percent-decoded once; scope tokens keep their case and order.
struct AuthorizationRequest {
    std::string endpoint;
    std::optional<IdpId> idp;
    std::optional<std::string> client_id;
    std::optional<std::string> redirect_uri;
    std::optional<std::string> response_type;
    std::vector<std::string> scopes;
    bool scope_present = false;
    ScopeDelimiter scope_delimiter = ScopeDelimiter::None;
    std::optional<std::string> state;
    std::optional<std::string> nonce;
    /// Every other query pair, in URL order (including repeated known names).
    std::vector<QueryParam> extra_params;
    std::string raw_url;

    friend bool operator==(const AuthorizationRequest&, const AuthorizationRequest&) = default;
};

struct FlowKind {
    enum class Kind { AuthorizationCode, Implicit, OidcVariant, Unknown };

    Kind kind = Kind::Unknown;
    /// The raw response_type for OidcVariant, empty otherwise.
    std::string response_type;

    std::string str() const;

    friend bool operator==(const FlowKind&, const FlowKind&) = default;
};

struct OptOutSet {
    std::set<std::string> scopes;
};

/// Scope tokens split from a raw (still encoded) scope value.
struct ScopeSplit {
    std::vector<std::string> tokens;
    /// Raw spelling of each token, parallel to `tokens`.
    std::vector<std::string> raw_tokens;
    ScopeDelimiter delimiter = ScopeDelimiter::None;
    /// Raw spelling of the first delimiter seen ("," "%2C" "%20" "+" " ").
    std::string raw_delimiter;
};

ScopeSplit split_scope(std::string_view raw_value);

/// Parses `url` as an authorization request. Returns nullopt when none of
/// client_id, response_type or scope is present. Throws MalformedUrl for
/// input that is not an absolute http(s) URL.
std::optional<AuthorizationRequest> parse_authorization_request(std::string_view url,
                                                                const IdpMatcher& matcher = {});

FlowKind classify_flow(const AuthorizationRequest& req);

/// Rebuilds raw_url with the opted-out scope tokens removed. Every other
/// parameter is copied byte for byte. Throws OptOutNotPresent when the
/// opt-out names a token the request does not carry.
std::string rewrite_without_scopes(const AuthorizationRequest& req, const OptOutSet& optout);

/// Serializes the parsed fields back into a URL (canonical parameter order).
std::string to_url(const AuthorizationRequest& req);

}  // namespace speye
