#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace speye {

/// An absolute http(s) URL split into its components. Scheme and host are
/// lowercased; path, query and fragment are kept in their raw encoded form.
struct Url {
    std::string scheme;
    std::string userinfo;
    std::string host;
    std::optional<int> port;
    std::string path = "/";
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    /// Throws MalformedUrl unless `text` is an absolute http or https URL.
    static Url parse(std::string_view text);
    static std::optional<Url> try_parse(std::string_view text);

    /// Resolves a (possibly relative) reference against this URL. Throws
    /// MalformedUrl when the result is not http(s), e.g. "javascript:".
    Url resolve(std::string_view reference) const;

    /// scheme://host[:port]
    std::string origin() const;
    /// origin + path, without query or fragment.
    std::string endpoint() const;
    std::string str() const;

    friend bool operator==(const Url&, const Url&) = default;
};

/// One query-string pair in raw (still percent-encoded) form.
struct RawQueryParam {
    std::string name;
    std::string value;
    bool has_equals = true;

    friend bool operator==(const RawQueryParam&, const RawQueryParam&) = default;
};

std::vector<RawQueryParam> split_query(std::string_view raw);
std::string join_query(const std::vector<RawQueryParam>& params);

/// Decodes %XX escapes once. Invalid escapes are kept literally.
std::string percent_decode(std::string_view s, bool plus_as_space = false);

/// Encodes everything outside the RFC 3986 unreserved set.
std::string percent_encode(std::string_view s);

/// Query pairs of `url` decoded with form semantics ('+' is a space).
std::vector<std::pair<std::string, std::string>> decoded_query_pairs(std::string_view url);

/// Best-effort registrable domain ("www.rp.co.uk" -> "rp.co.uk"). IP
/// literals and single-label hosts are returned unchanged.
std::string registrable_domain(std::string_view host);

}  // namespace speye
