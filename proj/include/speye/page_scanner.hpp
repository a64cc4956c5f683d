#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "speye/authorization_request.hpp"
#include "speye/html.hpp"
#include "speye/http.hpp"
#include "speye/idp.hpp"
#include "speye/registry.hpp"
#include "speye/url.hpp"

namespace speye {

/// Where the actionable target of a login affordance was found.
enum class AttributeSource { HrefLink, FormSubmit, ClickHandler, SdkCall, IframeSrc, TitleAttr };

/// Client-side SSO code pattern. Mixed is only ever a site-level verdict.
enum class PatternClass { HtmlEmbedded, ScriptDriven, SdkBased, Mixed };

std::string_view to_string(AttributeSource s);
std::string_view to_string(PatternClass p);
std::optional<PatternClass> pattern_class_from_string(std::string_view s);

struct FormDescriptor {
    std::string action;
    HttpMethod method = HttpMethod::Post;
    /// Submitted name/value pairs in document order.
    std::vector<QueryParam> fields;

    friend bool operator==(const FormDescriptor&, const FormDescriptor&) = default;
};

struct HandlerName {
    std::string value;

    friend bool operator==(const HandlerName&, const HandlerName&) = default;
};

/// An absolute URL, a form to submit, or the source of a click handler.
using CandidateTarget = std::variant<std::string, FormDescriptor, HandlerName>;

std::string describe_target(const CandidateTarget& target);

struct SsoCandidate {
    /// Lowercase trigger string, or "idp link" for nodes matched by URL.
    std::string matched_string;
    std::string element_kind;
    AttributeSource attribute_source = AttributeSource::HrefLink;
    CandidateTarget target;
    std::optional<IdpId> idp_hint;
    std::string dom_locator;

    friend bool operator==(const SsoCandidate&, const SsoCandidate&) = default;
};

struct SdkScopeFinding {
    IdpId idp = IdpId::facebook();
    std::vector<std::string> scopes;
    /// Script locator and line of the SDK call, e.g. "/html[1]/body[1]/script[2]:4".
    std::string evidence;

    friend bool operator==(const SdkScopeFinding&, const SdkScopeFinding&) = default;
};

struct PatternClassification {
    /// Absent when the page has no candidates.
    std::optional<PatternClass> site;
    /// Parallel to the classified candidate list.
    std::vector<PatternClass> per_candidate;
};

/// Trigger strings in matching priority (longest first).
const std::vector<std::string_view>& sso_trigger_strings();

/// True for text/html, application/xhtml+xml and an absent content type.
bool is_html_content_type(std::string_view content_type);

/// Parses a fetched page. Throws UnsupportedContentType for non-HTML content.
html::Document parse_page(std::string_view body, std::string_view content_type);

/// Every matching node before (idp_hint, target) deduplication, in
/// document order.
std::vector<SsoCandidate> detect_sso_matches(const html::Document& document, const Url& base_url,
                                             const Registry& registry);

/// detect_sso_matches with duplicate (idp_hint, target) pairs removed.
std::vector<SsoCandidate> find_sso_candidates(const html::Document& document, const Url& base_url,
                                              const Registry& registry);

PatternClassification classify_pattern(const html::Document& document,
                                       const std::vector<SsoCandidate>& candidates,
                                       const Registry& registry);

/// IdPs whose SDK script the page imports.
std::vector<IdpId> imported_sdks(const html::Document& document, const Registry& registry);

/// Scope literals passed to IdP SDK login calls in inline scripts. Scope
/// arguments built at run time are not evaluated and yield no finding.
std::vector<SdkScopeFinding> extract_sdk_scopes(const html::Document& document);

/// Names of <meta> tags carrying CSRF tokens (e.g. "csrf-token").
std::vector<std::string> csrf_meta_names(const html::Document& document);

}  // namespace speye
