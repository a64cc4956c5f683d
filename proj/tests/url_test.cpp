#include <gtest/gtest.h>

#include "speye/error.hpp"
#include "speye/url.hpp"

using namespace speye;

TEST(Url, ParsesComponents)
{
    Url u = Url::parse("HTTPS://User@Example.COM:8443/a/b?x=1&y=%20#frag");
    EXPECT_EQ(u.scheme, "https");
    EXPECT_EQ(u.userinfo, "User");
    EXPECT_EQ(u.host, "example.com");
    EXPECT_EQ(u.port, 8443);
    EXPECT_EQ(u.path, "/a/b");
    EXPECT_EQ(u.query, "x=1&y=%20");
    EXPECT_EQ(u.fragment, "frag");
    EXPECT_EQ(u.origin(), "https://example.com:8443");
    EXPECT_EQ(u.endpoint(), "https://example.com:8443/a/b");
}

TEST(Url, RejectsNonHttpInput)
{
    EXPECT_THROW(Url::parse("notaurl"), MalformedUrl);
    EXPECT_THROW(Url::parse("ftp://example.com/"), MalformedUrl);
    EXPECT_THROW(Url::parse("https://"), MalformedUrl);
    EXPECT_THROW(Url::parse("/relative/path"), MalformedUrl);
    EXPECT_FALSE(Url::try_parse("javascript:alert(1)").has_value());
}

TEST(Url, SerializationRoundTrips)
{
    for (const char* s : {"https://example.com/", "http://127.0.0.1:8080/site1?a=b", "https://h.example/p?#",
                          "https://h.example/p?q=%2F&r#x"}) {
        EXPECT_EQ(Url::parse(s).str(), s);
    }
}

// Reference resolution examples from RFC 3986, rebased on an http URL.
TEST(Url, ResolvesReferencesLikeRfc3986)
{
    const Url base = Url::parse("http://a/b/c/d;p?q");
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"g", "http://a/b/c/g"},        {"./g", "http://a/b/c/g"},         {"g/", "http://a/b/c/g/"},
        {"/g", "http://a/g"},           {"//g", "http://g/"},              {"?y", "http://a/b/c/d;p?y"},
        {"g?y", "http://a/b/c/g?y"},    {"#s", "http://a/b/c/d;p?q#s"},    {"g#s", "http://a/b/c/g#s"},
        {";x", "http://a/b/c/;x"},      {"", "http://a/b/c/d;p?q"},        {".", "http://a/b/c/"},
        {"./", "http://a/b/c/"},        {"..", "http://a/b/"},             {"../g", "http://a/b/g"},
        {"../..", "http://a/"},         {"../../g", "http://a/g"},         {"../../../g", "http://a/g"},
        {"/./g", "http://a/g"},         {"/../g", "http://a/g"},           {"g.", "http://a/b/c/g."},
        {"./../g", "http://a/b/g"},     {"g/./h", "http://a/b/c/g/h"},     {"g/../h", "http://a/b/c/h"},
    };
    for (const auto& [ref, expected] : cases) {
        EXPECT_EQ(base.resolve(ref).str(), expected) << "reference " << ref;
    }
    EXPECT_THROW(base.resolve("javascript:void(0)"), MalformedUrl);
    EXPECT_EQ(base.resolve("https://other.example/x").str(), "https://other.example/x");
}

TEST(Url, QuerySplitKeepsRawForm)
{
    auto params = split_query("a=1&b&c=%2C&&d=x=y");
    ASSERT_EQ(params.size(), 4u);
    EXPECT_EQ(params[0], (RawQueryParam{"a", "1", true}));
    EXPECT_EQ(params[1], (RawQueryParam{"b", "", false}));
    EXPECT_EQ(params[2], (RawQueryParam{"c", "%2C", true}));
    EXPECT_EQ(params[3], (RawQueryParam{"d", "x=y", true}));
    EXPECT_EQ(join_query(params), "a=1&b&c=%2C&d=x=y");
}

TEST(Url, PercentCoding)
{
    EXPECT_EQ(percent_decode("a%20b+c"), "a b+c");
    EXPECT_EQ(percent_decode("a%20b+c", true), "a b c");
    EXPECT_EQ(percent_decode("100%"), "100%");
    EXPECT_EQ(percent_decode("%zz%4"), "%zz%4");
    EXPECT_EQ(percent_decode("%e2%82%AC"), "\xE2\x82\xAC");
    EXPECT_EQ(percent_encode("a b/c~d-e_f.g"), "a%20b%2Fc~d-e_f.g");
    EXPECT_EQ(percent_decode(percent_encode("https://x.example/?q=1&r=\xC3\xA9")), "https://x.example/?q=1&r=\xC3\xA9");
}

TEST(Url, DecodedQueryPairsUseFormSemantics)
{
    auto pairs = decoded_query_pairs("https://x.example/?next=https%3A%2F%2Fy.example%2F&q=a+b");
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].second, "https://y.example/");
    EXPECT_EQ(pairs[1].second, "a b");
}

TEST(Url, RegistrableDomain)
{
    EXPECT_EQ(registrable_domain("www.example.com"), "example.com");
    EXPECT_EQ(registrable_domain("shop.rp.example.co.uk"), "example.co.uk");
    EXPECT_EQ(registrable_domain("example.com"), "example.com");
    EXPECT_EQ(registrable_domain("localhost"), "localhost");
    EXPECT_EQ(registrable_domain("127.0.0.1"), "127.0.0.1");
    EXPECT_EQ(registrable_domain("WWW.Example.COM"), "example.com");
}
