#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "speye/authorization_request.hpp"
#include "speye/page_scanner.hpp"
#include "speye/registry.hpp"
#include "speye/scan_types.hpp"

namespace speye {

enum class ResultSource { DrivenRedirect, StaticSdkLiteral, FocusedUrl };

std::string_view to_string(ResultSource s);

/// Permissions one IdP login option would request.
struct IdpResult {
    IdpId idp = IdpId::facebook();
    std::optional<AuthorizationRequest> request;
    /// Deduplicated; Basic before Extended, then by scope token.
    std::vector<Permission> permissions;
    FlowKind flow;
    ResultSource source = ResultSource::DrivenRedirect;
    std::vector<std::string> privacy_notes;

    friend bool operator==(const IdpResult&, const IdpResult&) = default;
};

/// Always attached to reports: the IdP may show fewer permissions than requested.
extern const std::string_view kIdpPruningDisclaimer;

struct ScanReport {
    std::string rp_origin;
    std::optional<std::string> scanned_at;
    std::optional<PatternClass> site_pattern;
    /// Ordered by the registry display order.
    std::vector<IdpResult> idp_results;
    std::vector<ScanMiss> misses;
    std::string disclaimer{kIdpPruningDisclaimer};

    friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

struct OptOutPreview {
    std::string scope_token;
    std::string url;

    friend bool operator==(const OptOutPreview&, const OptOutPreview&) = default;
};

struct FocusedReport {
    IdpId idp = IdpId::facebook();
    std::string rp_identifier;
    IdpResult result;
    /// One entry per optional permission.
    std::vector<OptOutPreview> optout_previews;
    std::string disclaimer{kIdpPruningDisclaimer};

    friend bool operator==(const FocusedReport&, const FocusedReport&) = default;
};

/// Everything one comparative scan observed.
struct ScanEvidence {
    std::vector<RedirectChain> chains;
    std::vector<SdkScopeFinding> findings;
    std::vector<ScanMiss> misses;
};

/// Describes `scopes` through the registry and applies the ordering and
/// privacy-note rules.
IdpResult make_idp_result(const IdpId& idp, std::optional<AuthorizationRequest> request,
                          const std::vector<std::string>& scopes, FlowKind flow, ResultSource source,
                          const Registry& registry);

ScanReport build_comparative_report(std::string rp_origin, std::optional<PatternClass> site_pattern,
                                    const ScanEvidence& evidence, const Registry& registry,
                                    std::optional<std::string> scanned_at = std::nullopt);

FocusedReport build_focused_report(const AuthorizationRequest& request, const Registry& registry);

nlohmann::json to_json(const ScanReport& report);
nlohmann::json to_json(const FocusedReport& report);
nlohmann::json to_json(const AuthorizationRequest& request);
nlohmann::json to_json(const SsoCandidate& candidate);

/// Canonical JSON: sorted keys, two-space indent, trailing newline.
std::string render_json(const ScanReport& report);
std::string render_json(const FocusedReport& report);
std::string canonical_dump(const nlohmann::json& value);
bool is_canonical_json(std::string_view document);

/// Terminal rendering, at most kTextWidth columns per line.
inline constexpr std::size_t kTextWidth = 100;
std::string render_text(const ScanReport& report);
std::string render_text(const FocusedReport& report);

}  // namespace speye
