#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "speye/authorization_request.hpp"
#include "speye/page_scanner.hpp"

namespace speye {

struct ScanConfig {
    int max_redirects = 5;
    std::chrono::milliseconds timeout{8000};
    int parallelism = 3;
    std::string user_agent = "speye/0.1 (SSO permission scanner)";
    /// Omits timestamps so repeated scans serialize identically.
    bool deterministic_mode = false;

    /// Throws std::invalid_argument when a bound is below 1.
    void validate() const;
};

struct Hop {
    std::string url;
    /// Absent for the final IdP hop, which is recognized but never fetched.
    std::optional<int> status;
    std::optional<std::string> location;

    friend bool operator==(const Hop&, const Hop&) = default;
};

struct ChainTerminal {
    enum class Kind { IdpEndpoint, NonRedirectResponse, DepthExceeded, NetworkError, Blocked };

    Kind kind = Kind::NetworkError;
    /// Set for IdpEndpoint.
    std::optional<AuthorizationRequest> request;
    /// HTTP status for NonRedirectResponse and Blocked.
    int status = 0;
    std::string reason;
    bool timed_out = false;

    friend bool operator==(const ChainTerminal&, const ChainTerminal&) = default;
};

std::string_view to_string(ChainTerminal::Kind k);

struct RedirectChain {
    std::vector<Hop> hops;
    ChainTerminal terminal;

    friend bool operator==(const RedirectChain&, const RedirectChain&) = default;
};

enum class MissReason { NonRedirect, CsrfTokenRequired, FetchMetadataBlocked, Timeout, DepthExceeded, NetworkError };

std::string_view to_string(MissReason r);
std::optional<MissReason> miss_reason_from_string(std::string_view s);

/// A login option whose authorization request could not be extracted.
struct ScanMiss {
    SsoCandidate candidate;
    MissReason reason = MissReason::NonRedirect;
    std::string detail;

    friend bool operator==(const ScanMiss&, const ScanMiss&) = default;
};

}  // namespace speye
