#include <gtest/gtest.h>

#include <fstream>
#include <unistd.h>

#include "speye/error.hpp"
#include "speye/fixtures.hpp"
#include "speye/report.hpp"
#include "speye/service.hpp"
#include "test_support.hpp"

using namespace speye;
using namespace speye::service;
using nlohmann::json;

namespace {

const std::string kFb = "https://www.facebook.com/v9.0/dialog/oauth?client_id=1&redirect_uri=https%3A%2F%2Fshop.example%2Fcb"
                        "&response_type=code&scope=email,public_profile,user_birthday";

ScanConfig deterministic()
{
    ScanConfig c;
    c.deterministic_mode = true;
    return c;
}

std::string error_code(const ApiResponse& r)
{
    EXPECT_TRUE(is_canonical_json(r.body)) << r.body;
    return json::parse(r.body).value("code", "");
}

class ServiceApi : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        fixtures_ = fixtures::serve_fixtures(fixtures::load_corpus(test::corpus_dir())).release();
        holder_ = net::make_http_transport();
        transport_ = holder_.get();
    }

    static void TearDownTestSuite()
    {
        delete fixtures_;
        holder_.reset();
    }

    static fixtures::FixtureServer* fixtures_;
    static inline std::shared_ptr<net::HttpTransport> holder_;
    static net::HttpTransport* transport_;
};

fixtures::FixtureServer* ServiceApi::fixtures_ = nullptr;
net::HttpTransport* ServiceApi::transport_ = nullptr;

}  // namespace

TEST_F(ServiceApi, ScanSucceeds)
{
    Api api(test::overlay_registry(), *transport_, deterministic());
    auto r = api.scan({{"url", fixtures_->site_url("site11") + "/"}});
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_TRUE(is_canonical_json(r.body));
    auto doc = json::parse(r.body);
    EXPECT_EQ(doc["idp_results"].size(), 3u);
    EXPECT_EQ(api.scan({{"url", fixtures_->site_url("site11") + "/"}}).body, r.body);
}

TEST_F(ServiceApi, ScanErrors)
{
    Api api(test::overlay_registry(), *transport_, deterministic());
    auto bad = api.scan({{"url", "notaurl"}});
    EXPECT_EQ(bad.status, 400);
    EXPECT_EQ(error_code(bad), kInvalidUrl);
    EXPECT_EQ(error_code(api.scan({})), kInvalidUrl);
    EXPECT_EQ(error_code(api.scan({{"url", "https://a.example/"}, {"url", "https://b.example/"}})), kInvalidUrl);
    EXPECT_EQ(error_code(api.scan({{"url", "https://a.example/"}, {"depth", "9"}})), kInvalidUrl);
    auto missing = api.scan({{"url", fixtures_->site_url("nosuchsite") + "/"}});
    EXPECT_EQ(missing.status, 502);
    EXPECT_EQ(error_code(missing), kFetchFailed);
}

TEST(ServiceApiUnit, UnreachableIsFetchFailed)
{
    test::FakeTransport t;
    t.fail("https://down.example/", {net::TransportError::Kind::Connection, "refused"});
    Api api(Registry::builtin(), t, deterministic());
    auto r = api.scan({{"url", "https://down.example/"}});
    EXPECT_EQ(r.status, 502);
    EXPECT_EQ(error_code(r), kFetchFailed);
}

TEST(ServiceApiUnit, Focused)
{
    test::FakeTransport t;
    Api api(Registry::builtin(), t, deterministic());
    auto r = api.focused({{"url", kFb}});
    ASSERT_EQ(r.status, 200);
    auto doc = json::parse(r.body);
    EXPECT_EQ(doc["idp"], "facebook");
    EXPECT_EQ(doc["optout_previews"].size(), 1u);
    EXPECT_TRUE(t.sent().empty());
    auto not_idp = api.focused({{"url", "https://rp.example/login"}});
    EXPECT_EQ(not_idp.status, 400);
    EXPECT_EQ(error_code(not_idp), kNotIdpUrl);
    EXPECT_EQ(error_code(api.focused({{"url", "::"}})), kInvalidUrl);
}

TEST(ServiceApiUnit, OptOut)
{
    test::FakeTransport t;
    Api api(Registry::builtin(), t, deterministic());
    auto r = api.optout(json{{"url", kFb}, {"scopes", {"user_birthday"}}}.dump());
    ASSERT_EQ(r.status, 200) << r.body;
    auto rewritten = json::parse(r.body)["rewritten_url"].get<std::string>();
    auto req = parse_authorization_request(rewritten, Registry::builtin().matcher());
    ASSERT_TRUE(req.has_value());
    EXPECT_EQ(req->scopes, (std::vector<std::string>{"email", "public_profile"}));

    EXPECT_EQ(error_code(api.optout(json{{"url", kFb}, {"scopes", {"user_friends"}}}.dump())), kInvalidUrl);
    EXPECT_EQ(error_code(api.optout("{not json")), kInvalidUrl);
    EXPECT_EQ(error_code(api.optout(json{{"url", kFb}}.dump())), kInvalidUrl);
    EXPECT_EQ(error_code(api.optout(json{{"url", kFb}, {"scopes", {1}}}.dump())), kInvalidUrl);
    EXPECT_EQ(error_code(api.optout(json{{"url", "https://rp.example/?scope=a"}, {"scopes", json::array()}}.dump())),
              kNotIdpUrl);
    EXPECT_EQ(error_code(api.optout(json{{"url", "https://www.facebook.com/login.php"}, {"scopes", json::array()}}.dump())),
              kNotIdpUrl);
}

TEST(ServiceApiUnit, Registry)
{
    test::FakeTransport t;
    Api api(Registry::builtin(), t, deterministic());
    auto all = json::parse(api.registry({}).body);
    ASSERT_EQ(all["idps"].size(), 3u);
    EXPECT_EQ(all["idps"][0]["idp"], "facebook");
    EXPECT_EQ(all["idps"][0]["endpoint_patterns"], 4);
    EXPECT_EQ(all["idps"][2]["display_name"], "Apple");
    auto one = api.registry({{"idp", "google"}});
    ASSERT_EQ(one.status, 200);
    EXPECT_EQ(json::parse(one.body)["idps"].size(), 1u);
    EXPECT_EQ(api.registry({{"idp", "yahoo"}}).status, 400);
    EXPECT_EQ(error_code(api.registry({{"x", "1"}})), kInvalidUrl);
}

TEST(ServiceApiUnit, ErrorBodiesUseClosedCodeSet)
{
    auto e = api_error(418, "internal", "boom");
    EXPECT_EQ(e.status, 418);
    EXPECT_EQ(e.body, "{\n  \"code\": \"internal\",\n  \"message\": \"boom\"\n}\n");
}

namespace {

net::HttpResponse call(net::HttpTransport& t, HttpMethod method, const std::string& url, std::string body = {})
{
    net::HttpRequest req{method, url, {}, std::move(body), method == HttpMethod::Post ? "application/json" : ""};
    auto result = t.send(req, std::chrono::seconds(10));
    EXPECT_TRUE(std::holds_alternative<net::HttpResponse>(result)) << url;
    return std::get<net::HttpResponse>(result);
}

}  // namespace

TEST_F(ServiceApi, ServerRoutes)
{
    Api api(test::overlay_registry(), *transport_, deterministic());
    Server server(api, {"127.0.0.1", 0, false, std::nullopt});
    const std::string target = percent_encode(fixtures_->site_url("site11") + "/");

    auto a = call(*transport_, HttpMethod::Get, server.origin() + "/api/scan?url=" + target);
    auto b = call(*transport_, HttpMethod::Get, server.origin() + "/api/scan?url=" + target);
    ASSERT_EQ(a.status, 200) << a.body;
    EXPECT_EQ(a.body, b.body);
    EXPECT_EQ(a.body, api.scan({{"url", fixtures_->site_url("site11") + "/"}}).body);
    EXPECT_NE(a.header("Content-Type").value_or("").find("application/json"), std::string::npos);
    EXPECT_FALSE(a.header("Access-Control-Allow-Origin").has_value());

    auto focused = call(*transport_, HttpMethod::Get, server.origin() + "/api/focused?url=" + percent_encode(kFb));
    EXPECT_EQ(focused.status, 200);
    auto optout = call(*transport_, HttpMethod::Post, server.origin() + "/api/optout",
                       json{{"url", kFb}, {"scopes", {"user_birthday"}}}.dump());
    EXPECT_EQ(optout.status, 200);
    EXPECT_EQ(call(*transport_, HttpMethod::Get, server.origin() + "/api/registry").status, 200);

    auto unknown = call(*transport_, HttpMethod::Get, server.origin() + "/api/nothing");
    EXPECT_EQ(unknown.status, 404);
    EXPECT_EQ(json::parse(unknown.body)["code"], kInvalidUrl);
    server.stop();
    server.stop();
}

TEST_F(ServiceApi, CorsAndStaticFiles)
{
    auto dir = std::filesystem::temp_directory_path() / ("speye-static-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "index.html") << "<!doctype html><title>dashboard</title>";
    Api api(Registry::builtin(), *transport_, deterministic());
    {
        Server server(api, {"127.0.0.1", 0, true, dir});
        auto r = call(*transport_, HttpMethod::Get, server.origin() + "/api/registry");
        EXPECT_EQ(r.header("Access-Control-Allow-Origin"), "*");
        auto page = call(*transport_, HttpMethod::Get, server.origin() + "/");
        EXPECT_EQ(page.status, 200);
        EXPECT_NE(page.body.find("dashboard"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST(ServiceServer, BusyPort)
{
    test::FakeTransport t;
    Api api(Registry::builtin(), t, deterministic());
    Server first(api, {"127.0.0.1", 0, false, std::nullopt});
    EXPECT_THROW(Server(api, {"127.0.0.1", first.port(), false, std::nullopt}), BindError);
}
