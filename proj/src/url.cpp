#include "speye/url.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "speye/error.hpp"
#include "speye/text.hpp"

namespace speye {
namespace {

struct ReferenceParts {
    std::string_view path;
    std::optional<std::string_view> query;
    std::optional<std::string_view> fragment;
};

ReferenceParts split_reference(std::string_view ref)
{
    ReferenceParts parts;
    if (auto hash = ref.find('#'); hash != std::string_view::npos) {
        parts.fragment = ref.substr(hash + 1);
        ref = ref.substr(0, hash);
    }
    if (auto q = ref.find('?'); q != std::string_view::npos) {
        parts.query = ref.substr(q + 1);
        ref = ref.substr(0, q);
    }
    parts.path = ref;
    return parts;
}

bool valid_scheme(std::string_view s)
{
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '+' || c == '-' || c == '.';
    });
}

bool valid_host(std::string_view host)
{
    if (host.empty()) return false;
    if (host.front() == '[') return host.back() == ']' && host.size() > 2;
    return std::all_of(host.begin(), host.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '%' || c >= 0x80;
    });
}

std::string remove_dot_segments(std::string_view path)
{
    std::vector<std::string> out;
    bool absolute = !path.empty() && path.front() == '/';
    auto segments = text::split(absolute ? path.substr(1) : path, '/');
    bool trailing_slash = false;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        bool last = i + 1 == segments.size();
        if (seg == ".") {
            trailing_slash = last;
        } else if (seg == "..") {
            if (!out.empty()) out.pop_back();
            trailing_slash = last;
        } else {
            out.push_back(seg);
            trailing_slash = false;
        }
    }
    std::string result = absolute ? "/" : "";
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i > 0) result += '/';
        result += out[i];
    }
    if (trailing_slash && !result.empty() && result.back() != '/') result += '/';
    return result;
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Url Url::parse(std::string_view input)
{
    std::string_view s = text::trim(input);
    for (unsigned char c : s) {
        if (c <= 0x20 || c == 0x7F) throw MalformedUrl("contains whitespace or control characters");
    }
    auto colon = s.find(':');
    if (colon == std::string_view::npos || !valid_scheme(s.substr(0, colon))) {
        throw MalformedUrl(std::string(s));
    }
    Url url;
    url.scheme = text::to_lower(s.substr(0, colon));
    if (url.scheme != "http" && url.scheme != "https") {
        throw MalformedUrl("unsupported scheme '" + url.scheme + "'");
    }
    std::string_view rest = s.substr(colon + 1);
    if (rest.substr(0, 2) != "//") throw MalformedUrl(std::string(s));
    rest.remove_prefix(2);

    auto authority_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, authority_end);
    rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    if (auto at = authority.rfind('@'); at != std::string_view::npos) {
        url.userinfo = std::string(authority.substr(0, at));
        authority = authority.substr(at + 1);
    }
    std::string_view host = authority;
    std::size_t port_sep = std::string_view::npos;
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) throw MalformedUrl(std::string(s));
        if (close + 1 < authority.size()) {
            if (authority[close + 1] != ':') throw MalformedUrl(std::string(s));
            port_sep = close + 1;
        }
    } else {
        port_sep = authority.rfind(':');
    }
    if (port_sep != std::string_view::npos) {
        host = authority.substr(0, port_sep);
        std::string_view port = authority.substr(port_sep + 1);
        if (!port.empty()) {
            if (port.size() > 5 || !std::all_of(port.begin(), port.end(), [](unsigned char c) {
                    return std::isdigit(c);
                })) {
                throw MalformedUrl("bad port in " + std::string(s));
            }
            int value = std::stoi(std::string(port));
            if (value > 65535) throw MalformedUrl("bad port in " + std::string(s));
            url.port = value;
        }
    }
    if (!valid_host(host)) throw MalformedUrl("bad host in " + std::string(s));
    url.host = text::to_lower(host);

    auto parts = split_reference(rest);
    url.path = parts.path.empty() ? "/" : std::string(parts.path);
    if (parts.query) url.query = std::string(*parts.query);
    if (parts.fragment) url.fragment = std::string(*parts.fragment);
    return url;
}

std::optional<Url> Url::try_parse(std::string_view text)
{
    try {
        return parse(text);
    } catch (const MalformedUrl&) {
        return std::nullopt;
    }
}

Url Url::resolve(std::string_view reference) const
{
    std::string_view ref = text::trim(reference);
    if (auto colon = ref.find(':'); colon != std::string_view::npos) {
        auto first_delim = ref.find_first_of("/?#");
        if ((first_delim == std::string_view::npos || colon < first_delim) &&
            valid_scheme(ref.substr(0, colon))) {
            return parse(ref);
        }
    }
    if (ref.substr(0, 2) == "//") {
        return parse(scheme + ":" + std::string(ref));
    }
    for (unsigned char c : ref) {
        if (c < 0x20 || c == 0x7F) throw MalformedUrl("contains control characters");
    }

    Url out = *this;
    auto parts = split_reference(ref);
    out.fragment = parts.fragment ? std::optional<std::string>(std::string(*parts.fragment)) : std::nullopt;
    if (parts.path.empty()) {
        if (parts.query) out.query = std::string(*parts.query);
        return out;
    }
    out.query = parts.query ? std::optional<std::string>(std::string(*parts.query)) : std::nullopt;
    if (parts.path.front() == '/') {
        out.path = remove_dot_segments(parts.path);
    } else {
        std::string merged = path.substr(0, path.rfind('/') + 1) + std::string(parts.path);
        out.path = remove_dot_segments(merged);
    }
    if (out.path.empty()) out.path = "/";
    return out;
}

std::string Url::origin() const
{
    std::string out = scheme + "://" + host;
    if (port) out += ":" + std::to_string(*port);
    return out;
}

std::string Url::endpoint() const
{
    return origin() + path;
}

std::string Url::str() const
{
    std::string out = scheme + "://";
    if (!userinfo.empty()) out += userinfo + "@";
    out += host;
    if (port) out += ":" + std::to_string(*port);
    out += path;
    if (query) out += "?" + *query;
    if (fragment) out += "#" + *fragment;
    return out;
}

std::vector<RawQueryParam> split_query(std::string_view raw)
{
    std::vector<RawQueryParam> params;
    if (raw.empty()) return params;
    for (auto& piece : text::split(raw, '&')) {
        if (piece.empty()) continue;
        RawQueryParam p;
        if (auto eq = piece.find('='); eq != std::string::npos) {
            p.name = piece.substr(0, eq);
            p.value = piece.substr(eq + 1);
        } else {
            p.name = piece;
            p.has_equals = false;
        }
        params.push_back(std::move(p));
    }
    return params;
}

std::string join_query(const std::vector<RawQueryParam>& params)
{
    std::string out;
    for (const auto& p : params) {
        if (!out.empty()) out += '&';
        out += p.name;
        if (p.has_equals || !p.value.empty()) out += "=" + p.value;
    }
    return out;
}

std::string percent_decode(std::string_view s, bool plus_as_space)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '%' && i + 2 < s.size()) {
            int hi = hex_value(s[i + 1]);
            int lo = hex_value(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(plus_as_space && c == '+' ? ' ' : c);
    }
    return out;
}

std::string percent_encode(std::string_view s)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size() * 3);
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0x0F]);
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> decoded_query_pairs(std::string_view url)
{
    Url parsed = Url::parse(url);
    std::vector<std::pair<std::string, std::string>> out;
    if (!parsed.query) return out;
    for (const auto& p : split_query(*parsed.query)) {
        out.emplace_back(percent_decode(p.name, true), percent_decode(p.value, true));
    }
    return out;
}

std::string registrable_domain(std::string_view host_in)
{
    std::string host = text::to_lower(host_in);
    if (!host.empty() && host.back() == '.') host.pop_back();
    if (host.empty() || host.front() == '[') return host;
    if (std::all_of(host.begin(), host.end(), [](unsigned char c) { return std::isdigit(c) || c == '.'; })) {
        return host;
    }
    auto labels = text::split(host, '.');
    if (labels.size() <= 2) return host;

    // Country-code TLDs commonly sold under a generic second level (co.uk, com.au).
    static constexpr std::array<std::string_view, 9> second_levels = {
        "co", "com", "org", "net", "ac", "gov", "edu", "ne", "or"};
    std::size_t keep = 2;
    const auto& tld = labels.back();
    const auto& sld = labels[labels.size() - 2];
    if (tld.size() == 2 && std::find(second_levels.begin(), second_levels.end(), sld) != second_levels.end()) {
        keep = 3;
    }
    std::string out;
    for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

}  // namespace speye
