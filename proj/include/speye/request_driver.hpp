#pragma once

#include <string_view>

#include "speye/http.hpp"
#include "speye/page_scanner.hpp"
#include "speye/registry.hpp"
#include "speye/report.hpp"
#include "speye/scan_types.hpp"

namespace speye {

/// Link and form candidates can be issued as requests; script handlers cannot.
bool is_driveable(const SsoCandidate& candidate);

/// Issues the candidate's request and follows redirects until a URL matches
/// an IdP endpoint (never fetched), a non-redirect response, a repeated URL,
/// or the hop bound. Sends no cookies or credentials. Failures are encoded
/// in the chain terminal; nothing is thrown.
RedirectChain resolve_candidate(const SsoCandidate& candidate, const ScanConfig& config, const Registry& registry,
                                net::HttpTransport& transport);

/// Maps a chain that did not reach an IdP to a miss; nullopt for IdP chains.
std::optional<ScanMiss> classify_miss(const SsoCandidate& candidate, const RedirectChain& chain,
                                      bool page_has_csrf_meta);

/// Comparative mode: fetch the RP page, detect login options, drive them
/// (bounded parallelism) and assemble the report. Throws MalformedUrl for a
/// bad URL and PageFetchError when the page itself cannot be retrieved.
ScanReport scan_rp(std::string_view url, const ScanConfig& config, const Registry& registry,
                   net::HttpTransport& transport);

/// Focused mode: parse an IdP authorization URL in place. Generates no
/// network traffic. Throws NotAnIdpUrl when no endpoint pattern matches or
/// the URL carries no authorization parameters.
FocusedReport focused_scan(std::string_view idp_url, const Registry& registry);

}  // namespace speye
