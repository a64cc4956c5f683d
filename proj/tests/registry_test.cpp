#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "endpoint_vector.hpp"
#include "speye/registry.hpp"

using namespace speye;

namespace {

const std::string kMinimal = R"json({
  "display_order": ["facebook", "google", "apple"],
  "endpoints": [
    {"idp": "facebook", "pattern": "https://(.*)\\.facebook\\.com/(.*)/oauth(.*)"},
    {"idp": "google", "pattern": "https://(.*)\\.google\\.com/(.*)/oauth(.*)"},
    {"idp": "apple", "pattern": "https://(.*)\\.apple\\.com/auth(.*)"}
  ],
  "permissions": [
    {"idp": "facebook", "scope": "email", "description": "Your email address", "category": "Basic"},
    {"idp": "facebook", "scope": "user_likes", "description": "Pages you liked", "category": "Extended"}
  ]
})json";

RegistryError load_error(const std::string& doc)
{
    try {
        Registry::load(doc);
    } catch (const RegistryError& e) {
        return e;
    }
    throw std::runtime_error("registry loaded without error");
}

std::string replace(std::string s, const std::string& from, const std::string& to)
{
    s.replace(s.find(from), from.size(), to);
    return s;
}

}  // namespace

TEST(Registry, BuiltinHasTheNineEndpointExpressions)
{
    const auto& reg = Registry::builtin();
    ASSERT_EQ(reg.endpoint_patterns().size(), 9u);
    const auto& published = test::published_expressions();
    for (std::size_t i = 0; i < published.size(); ++i) {
        EXPECT_EQ(reg.endpoint_patterns()[i].pattern, published[i].expression);
        EXPECT_EQ(reg.endpoint_patterns()[i].idp.name(), published[i].idp);
    }
    EXPECT_EQ(reg.display_order(), (std::vector<IdpId>{IdpId::facebook(), IdpId::google(), IdpId::apple()}));
}

TEST(Registry, AgreesWithPublishedExpressionsOnEndpointVector)
{
    const auto& reg = Registry::builtin();
    std::set<std::size_t> covered;
    for (const auto& entry : test::endpoint_vector()) {
        auto oracle = test::published_match(entry.url);
        EXPECT_EQ(oracle, entry.expression) << entry.url;
        auto got = match_idp_endpoint(reg, entry.url);
        if (oracle) {
            ASSERT_TRUE(got.has_value()) << entry.url;
            EXPECT_EQ(got->name(), test::published_expressions()[*oracle].idp) << entry.url;
            covered.insert(*oracle);
        } else {
            EXPECT_FALSE(got.has_value()) << entry.url;
        }
    }
    EXPECT_EQ(covered.size(), 9u);
}

TEST(Registry, MatchExamples)
{
    const auto& reg = Registry::builtin();
    EXPECT_EQ(reg.match_endpoint("https://www.facebook.com/v9.0/dialog/oauth?x=1"), IdpId::facebook());
    EXPECT_EQ(reg.match_endpoint("https://appleid.apple.com/auth/authorize?x=1"), IdpId::apple());
    EXPECT_FALSE(reg.match_endpoint("https://example.com/oauth").has_value());
}

TEST(Registry, DescribeScope)
{
    const auto& reg = Registry::builtin();
    auto mail = describe_scope(reg, IdpId::google(), "https://www.googleapis.com/auth/gmail.readonly");
    EXPECT_NE(mail.description.find("email messages"), std::string::npos);
    EXPECT_EQ(mail.category, PermissionCategory::Extended);
    EXPECT_EQ(describe_scope(reg, IdpId::facebook(), "public_profile").category, PermissionCategory::Basic);
    auto unknown = describe_scope(reg, IdpId::google(), "made_up_scope_xyz");
    EXPECT_TRUE(unknown.unknown);
    EXPECT_EQ(unknown.description, "Unrecognized permission: made_up_scope_xyz");
    EXPECT_EQ(unknown.category, PermissionCategory::Extended);
}

TEST(Registry, CatalogCoversRequiredScopes)
{
    const auto& reg = Registry::builtin();
    auto known = [&](const IdpId& idp, const char* token) { return !reg.describe(idp, token).unknown; };
    for (const char* t : {"public_profile", "email", "user_friends", "user_likes", "user_photos", "user_birthday"}) {
        EXPECT_TRUE(known(IdpId::facebook(), t)) << t;
    }
    for (const char* t : {"openid", "email", "profile", "https://www.googleapis.com/auth/gmail.readonly",
                          "https://www.googleapis.com/auth/calendar.readonly"}) {
        EXPECT_TRUE(known(IdpId::google(), t)) << t;
    }
    EXPECT_TRUE(known(IdpId::apple(), "name"));
    EXPECT_TRUE(known(IdpId::apple(), "email"));
    EXPECT_TRUE(reg.describe(IdpId::apple(), "email").privacy_note.has_value());
}

TEST(Registry, SharedSentencesAcrossIdps)
{
    const auto& reg = Registry::builtin();
    EXPECT_EQ(reg.describe(IdpId::facebook(), "email").description, reg.describe(IdpId::google(), "email").description);
    EXPECT_EQ(reg.describe(IdpId::google(), "email").description, reg.describe(IdpId::apple(), "email").description);
    EXPECT_EQ(reg.describe(IdpId::facebook(), "public_profile").description,
              reg.describe(IdpId::google(), "profile").description);
}

TEST(Registry, DescriptionsAreNeverEmpty)
{
    const auto& reg = Registry::builtin();
    for (const auto& p : reg.permissions()) EXPECT_FALSE(p.description.empty()) << p.scope_token;
    for (const char* t : {"", "x", "  "}) EXPECT_FALSE(reg.describe(IdpId::apple(), t).description.empty());
}

TEST(Registry, ExtendedDefaultsToOptional)
{
    auto reg = Registry::load(kMinimal);
    EXPECT_FALSE(reg.describe(IdpId::facebook(), "email").optional);
    EXPECT_TRUE(reg.describe(IdpId::facebook(), "user_likes").optional);
    EXPECT_TRUE(reg.sdk_hosts().empty());
}

TEST(Registry, RejectsDuplicateScope)
{
    auto doc = replace(kMinimal, "\"scope\": \"user_likes\"", "\"scope\": \"email\"");
    auto e = load_error(doc);
    EXPECT_EQ(e.kind(), RegistryError::Kind::DuplicateScope);
    EXPECT_EQ(e.location(), "/permissions/1");
}

TEST(Registry, RejectsBadPattern)
{
    auto doc = replace(kMinimal, R"(https://(.*)\\.apple\\.com/auth(.*))", "https://(");
    auto e = load_error(doc);
    EXPECT_EQ(e.kind(), RegistryError::Kind::BadPattern);
    EXPECT_EQ(e.location(), "/endpoints/2/pattern");
}

TEST(Registry, ReportsSyntaxErrorLine)
{
    auto doc = replace(kMinimal, "\"category\": \"Extended\"}", "\"category\": \"Extended\",}");
    auto e = load_error(doc);
    EXPECT_EQ(e.kind(), RegistryError::Kind::ParseError);
    EXPECT_EQ(e.location(), "line 10");
}

TEST(Registry, RejectsStructuralViolations)
{
    EXPECT_EQ(load_error(replace(kMinimal, R"(["facebook", "google", "apple"])", R"(["google", "facebook", "apple"])"))
                  .kind(),
              RegistryError::Kind::Invalid);
    EXPECT_EQ(load_error(replace(kMinimal, R"("idp": "facebook", "scope": "email")", R"("idp": "yahoo", "scope": "email")"))
                  .location(),
              "/permissions/0/idp");
    EXPECT_EQ(load_error(replace(kMinimal, R"("category": "Basic")", R"("category": "Core")")).location(),
              "/permissions/0/category");
    EXPECT_EQ(load_error(replace(kMinimal, "\"description\": \"Pages you liked\"", "\"description\": \" \"")).kind(),
              RegistryError::Kind::Invalid);
    EXPECT_EQ(load_error("[]").kind(), RegistryError::Kind::ParseError);
}

TEST(Registry, ExampleMustMatchPattern)
{
    auto doc = replace(kMinimal, R"x("pattern": "https://(.*)\\.apple\\.com/auth(.*)")x",
                       R"x("pattern": "https://(.*)\\.apple\\.com/auth(.*)", "example": "https://apple.example/")x");
    EXPECT_EQ(load_error(doc).location(), "/endpoints/2/example");
}

TEST(Registry, SerializationRoundTrips)
{
    const auto& reg = Registry::builtin();
    auto again = Registry::load(reg.to_json().dump());
    EXPECT_EQ(again.to_json(), reg.to_json());
    EXPECT_EQ(again.permissions(), reg.permissions());
}

TEST(Registry, SdkHosts)
{
    const auto& reg = Registry::builtin();
    EXPECT_EQ(reg.sdk_idp_for_host("connect.facebook.net"), IdpId::facebook());
    EXPECT_EQ(reg.sdk_idp_for_host("APIS.google.com"), IdpId::google());
    EXPECT_EQ(reg.sdk_idp_for_host("appleid.cdn-apple.com"), IdpId::apple());
    EXPECT_FALSE(reg.sdk_idp_for_host("evilconnect.facebook.net.example").has_value());
}

TEST(Registry, DisplayRank)
{
    const auto& reg = Registry::builtin();
    EXPECT_LT(reg.display_rank(IdpId::facebook()), reg.display_rank(IdpId::google()));
    EXPECT_LT(reg.display_rank(IdpId::google()), reg.display_rank(IdpId::apple()));
    EXPECT_EQ(reg.display_rank(*IdpId::from_name("yahoo")), 3u);
}

TEST(Registry, ExtraEndpointsComeAfterExisting)
{
    const auto& reg = Registry::builtin();
    auto extended = reg.with_extra_endpoints({{*IdpId::from_name("github"), "https://github\\.com/login/oauth/(.*)", {}}});
    EXPECT_EQ(extended.endpoint_patterns().size(), 10u);
    EXPECT_EQ(extended.match_endpoint("https://github.com/login/oauth/authorize?client_id=1")->name(), "github");
    EXPECT_THROW(reg.with_extra_endpoints({{IdpId::apple(), "(", {}}}), RegistryError);
}
