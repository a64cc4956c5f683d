#pragma once

#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "speye/idp.hpp"

namespace speye::test {

/// The nine endpoint expressions as published, written as string literals
/// so each "\\." becomes the regex escape "\.".
struct PublishedExpression {
    const char* idp;
    const char* expression;
};

inline const std::vector<PublishedExpression>& published_expressions()
{
    static const std::vector<PublishedExpression> list = {
        {"facebook", "https://(.*)\\.facebook\\.com/login(.*)"},
        {"facebook", "https://(.*)\\.facebook\\.com/oauth(.*)"},
        {"facebook", "https://graph\\.facebook\\.com/(.*)"},
        {"facebook", "https://(.*)\\.facebook\\.com/(.*)/oauth(.*)"},
        {"google", "https://(.*)\\.google\\.com/(.*)/oauth(.*)"},
        {"google", "https://oauth2\\.googleapis\\.com/(.*)"},
        {"google", "https://openidconnect\\.googleapis\\.com/(.*)"},
        {"google", "https://googleapis\\.com/oauth(.*)"},
        {"apple", "https://(.*)\\.apple\\.com/auth(.*)"},
    };
    return list;
}

/// Index of the first published expression matching the whole URL,
/// evaluated with the POSIX extended grammar.
inline std::optional<std::size_t> published_match(const std::string& url)
{
    static const std::vector<std::regex> compiled = [] {
        std::vector<std::regex> out;
        for (const auto& e : published_expressions()) out.emplace_back(e.expression, std::regex::extended);
        return out;
    }();
    for (std::size_t i = 0; i < compiled.size(); ++i) {
        if (std::regex_match(url, compiled[i])) return i;
    }
    return std::nullopt;
}

struct EndpointVectorEntry {
    std::string url;
    /// Expression the URL was written for; nullopt for negatives.
    std::optional<std::size_t> expression;
};

/// Nine positives, one per expression, and five negatives.
inline const std::vector<EndpointVectorEntry>& endpoint_vector()
{
    static const std::vector<EndpointVectorEntry> v = {
        {"https://www.facebook.com/login.php?skip_api_login=1&api_key=42", 0},
        {"https://m.facebook.com/oauth/authorize?client_id=1&scope=email", 1},
        {"https://graph.facebook.com/v2.0/me?fields=id", 2},
        {"https://www.facebook.com/v9.0/dialog/oauth?client_id=1&scope=email", 3},
        {"https://accounts.google.com/o/oauth2/v2/auth?client_id=1&scope=openid", 4},
        {"https://oauth2.googleapis.com/token", 5},
        {"https://openidconnect.googleapis.com/v1/userinfo", 6},
        {"https://googleapis.com/oauth2/v4/token", 7},
        {"https://appleid.apple.com/auth/authorize?client_id=com.rp&scope=name%20email", 8},
        {"https://example.com/oauth", std::nullopt},
        {"https://www.facebook.com/profile.php?id=4", std::nullopt},
        {"http://www.facebook.com/v9.0/dialog/oauth?client_id=1", std::nullopt},
        {"https://accounts.google.com/signin/v2/identifier", std::nullopt},
        {"https://www.apple.com/shop/bag", std::nullopt},
    };
    return v;
}

}  // namespace speye::test
