#pragma once

#include <iosfwd>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "speye/authorization_request.hpp"
#include "speye/error.hpp"
#include "speye/idp.hpp"

namespace speye {

enum class PermissionCategory { Basic, Extended };

std::string_view to_string(PermissionCategory c);

/// One scope token of one IdP with its human-readable meaning.
struct Permission {
    IdpId idp = IdpId::facebook();
    std::string scope_token;
    std::string description;
    PermissionCategory category = PermissionCategory::Extended;
    bool optional = true;
    std::optional<std::string> privacy_note;
    /// Set on permissions synthesized for tokens missing from the catalog.
    bool unknown = false;

    friend bool operator==(const Permission&, const Permission&) = default;
};

struct EndpointPattern {
    IdpId idp = IdpId::facebook();
    std::string pattern;
    std::optional<std::string> example;
};

/// Script host of an IdP's client SDK, e.g. connect.facebook.net.
struct SdkHost {
    IdpId idp = IdpId::facebook();
    std::string host;
};

class RegistryError : public Error {
public:
    enum class Kind { ParseError, DuplicateScope, BadPattern, Invalid };

    RegistryError(Kind kind, std::string location, const std::string& message);

    Kind kind() const noexcept { return kind_; }
    /// "line N" for syntax errors, a JSON pointer for field errors.
    const std::string& location() const noexcept { return location_; }

private:
    Kind kind_;
    std::string location_;
};

/// Endpoint patterns, SDK hosts and the scope catalog. Immutable once built.
class Registry {
public:
    /// An empty registry: no IdPs, no patterns.
    Registry() = default;

    /// Parses and validates the registry file format. Throws RegistryError.
    static Registry load(std::istream& source);
    static Registry load(std::string_view document);
    static Registry load_file(const std::string& path);

    /// The registry shipped with the tool.
    static const Registry& builtin();

    const std::vector<EndpointPattern>& endpoint_patterns() const noexcept { return endpoints_; }
    const std::vector<Permission>& permissions() const noexcept { return permissions_; }
    const std::vector<IdpId>& display_order() const noexcept { return display_order_; }
    const std::vector<SdkHost>& sdk_hosts() const noexcept { return sdk_hosts_; }

    /// First pattern in file order that matches the whole URL.
    std::optional<IdpId> match_endpoint(std::string_view url) const;

    /// The cataloged permission, or a synthesized unknown-flagged one.
    Permission describe(const IdpId& idp, std::string_view scope_token) const;

    /// IdP whose SDK is served from `host` (exact or subdomain match).
    std::optional<IdpId> sdk_idp_for_host(std::string_view host) const;

    /// Position in the display order; IdPs not listed sort after all listed ones.
    std::size_t display_rank(const IdpId& idp) const;

    IdpMatcher matcher() const;

    /// A copy with extra endpoint patterns appended after the existing ones.
    Registry with_extra_endpoints(const std::vector<EndpointPattern>& extra) const;

    /// Serializes back to the registry file format.
    nlohmann::json to_json() const;

private:
    struct Compiled {
        IdpId idp;
        std::regex regex;
    };

    void compile();

    std::vector<EndpointPattern> endpoints_;
    std::vector<Compiled> compiled_;
    std::vector<Permission> permissions_;
    std::vector<IdpId> display_order_;
    std::vector<SdkHost> sdk_hosts_;
};

Registry load_registry(std::istream& source);
std::optional<IdpId> match_idp_endpoint(const Registry& registry, std::string_view url);
Permission describe_scope(const Registry& registry, const IdpId& idp, std::string_view scope_token);

}  // namespace speye
